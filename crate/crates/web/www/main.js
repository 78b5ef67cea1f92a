import init, { maskPreview, responsePreview, reconstruct } from "./pkg/kdac_web.js";

const $ = (id) => document.getElementById(id);
const status = $("status");
const MASK_SIDE = 128;

function paint(canvas, n, pixels) {
  canvas.width = n;
  canvas.height = n;
  const ctx = canvas.getContext("2d");
  ctx.putImageData(new ImageData(new Uint8ClampedArray(pixels), n, n), 0, 0);
}

function figure(parent, caption, n, pixels) {
  const fig = document.createElement("figure");
  const canvas = document.createElement("canvas");
  const cap = document.createElement("figcaption");
  cap.textContent = caption;
  fig.append(canvas, cap);
  parent.append(fig);
  paint(canvas, n, pixels);
}

function guarded(fn) {
  return () => {
    try {
      status.textContent = "";
      fn();
    } catch (e) {
      status.textContent = String(e.message ?? e);
    }
  };
}

function maskParams() {
  return {
    kind: $("mask-kind").value,
    ratio: Number($("mask-ratio").value),
    seed: Number($("mask-seed").value) >>> 0,
  };
}

const drawMask = guarded(() => {
  const { kind, ratio, seed } = maskParams();
  $("mask-ratio-out").textContent = ratio.toFixed(2);
  const p = maskPreview(kind, ratio, MASK_SIDE, seed);
  paint($("mask-canvas"), p.n, p.pixels);
  $("mask-info").textContent = `${p.sampled} samples, achieved ratio ${p.achieved_ratio.toFixed(4)}`;
});

const drawBank = guarded(() => {
  const root = $("bank-figures");
  root.replaceChildren();
  const bank = $("bank-kind").value;
  const first = responsePreview(bank, 0, MASK_SIDE);
  for (let i = 0; i < first.count; i++) {
    const p = i === 0 ? first : responsePreview(bank, i, MASK_SIDE);
    figure(root, `${p.label} (${p.band})`, p.n, p.pixels);
  }
});

const fmt = (v, digits) => (Number.isFinite(v) ? v.toFixed(digits) : "inf");

const runRecon = guarded(() => {
  const { kind, ratio, seed } = maskParams();
  const bank = $("bank-kind").value;
  const n = Number($("recon-n").value);
  const sigma = Number($("recon-sigma").value);
  const iters = Number($("recon-iters").value);
  const t0 = performance.now();
  const r = reconstruct(kind, ratio, n, seed, bank, sigma, iters);
  const ms = performance.now() - t0;

  const root = $("recon-figures");
  root.replaceChildren();
  figure(root, "reference", r.n, r.reference);
  figure(root, "zero fill", r.n, r.zero_fill);
  figure(root, "direct FCSA", r.n, r.direct);
  figure(root, `FCSA + ${bank}`, r.n, r.dac);

  const body = $("recon-table").querySelector("tbody");
  body.replaceChildren();
  ["zero fill", "direct FCSA", `FCSA + ${bank}`].forEach((name, i) => {
    const m = r.metrics.slice(3 * i, 3 * i + 3);
    const row = document.createElement("tr");
    row.innerHTML = `<th>${name}</th><td>${fmt(m[0], 2)}</td><td>${fmt(m[1], 4)}</td><td>${fmt(m[2], 4)}</td>`;
    body.append(row);
  });
  $("recon-table").hidden = false;
  status.textContent = `ratio ${r.achieved_ratio.toFixed(4)}, ${ms.toFixed(0)} ms`;
});

await init();
status.textContent = "";
for (const id of ["mask-kind", "mask-ratio", "mask-seed"]) $(id).addEventListener("input", drawMask);
$("bank-kind").addEventListener("input", drawBank);
$("recon-run").addEventListener("click", runRecon);
drawMask();
drawBank();
