import init, { legendreSamples, abscissaScan, stableDelays, certify } from "./pkg/iqc_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, xs, series, yRange, zeroLine) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const [y0, y1] = yRange;
  const px = (x) => ((x - xs[0]) / (xs[xs.length - 1] - xs[0])) * (w - 20) + 10;
  const py = (y) => h - 10 - ((y - y0) / (y1 - y0)) * (h - 20);
  if (zeroLine) {
    ctx.strokeStyle = "#999";
    ctx.beginPath();
    ctx.moveTo(px(xs[0]), py(0));
    ctx.lineTo(px(xs[xs.length - 1]), py(0));
    ctx.stroke();
  }
  series.forEach((ys, i) => {
    ctx.strokeStyle = `hsl(${(i * 47) % 360}, 70%, 40%)`;
    ctx.beginPath();
    ys.forEach((y, j) => (j ? ctx.lineTo(px(xs[j]), py(y)) : ctx.moveTo(px(xs[j]), py(y))));
    ctx.stroke();
  });
}

function drawLegendre() {
  const order = Number($("leg-order").value);
  const samples = 201;
  const flat = legendreSamples(order, samples);
  const xs = Array.from({ length: samples }, (_, i) => i / (samples - 1));
  const series = [];
  for (let k = 0; k <= order; k++) series.push(Array.from(flat.slice(k * samples, (k + 1) * samples)));
  $("leg-label").textContent = `ℓ₀ … ℓ${order}`;
  plot($("leg-canvas"), xs, series, [-1.1, 1.1], true);
}

function runScan() {
  const k = Number($("scan-k").value);
  const hMax = Number($("scan-hmax").value);
  const n = 300;
  const hs = Float64Array.from({ length: n }, (_, i) => 0.001 + (i * (hMax - 0.001)) / (n - 1));
  try {
    const ab = Array.from(abscissaScan(k, hs));
    const lo = Math.min(...ab), hi = Math.max(...ab);
    plot($("scan-canvas"), Array.from(hs), [ab], [Math.min(lo, -0.05), Math.max(hi, 0.05)], true);
    const iv = stableDelays(k, hMax, 0.01);
    const parts = [];
    for (let i = 0; i < iv.length; i += 2) parts.push(`[${iv[i].toFixed(3)}, ${iv[i + 1].toFixed(3)}]`);
    $("scan-out").textContent = `stable delays: ${parts.join(" ") || "none"}`;
  } catch (e) {
    $("scan-out").textContent = `error: ${e.message ?? e}`;
  }
}

function runCertify() {
  const k = Number($("cert-k").value);
  const n = Number($("cert-n").value);
  const h = Number($("cert-h").value);
  $("cert-out").textContent = "solving…";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const c = certify(k, n, h);
      const ms = (performance.now() - t0).toFixed(0);
      $("cert-out").textContent =
        `${c.certified ? "certified stable" : "not certified"} (${c.status})\n` +
        `margin ${c.margin.toExponential(3)}, ${c.iterations} iterations, ${ms} ms`;
    } catch (e) {
      $("cert-out").textContent = `error: ${e.message ?? e}`;
    }
  }, 0);
}

await init();
$("leg-order").addEventListener("input", drawLegendre);
$("scan-run").addEventListener("click", runScan);
$("cert-run").addEventListener("click", runCertify);
drawLegendre();
runScan();
