import init, { simulateReconstruct, mseCurve, weightFunctions } from "./pkg/maxlin_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

function params() {
  return {
    a: Number($("a").value),
    d: Math.max(1, Math.floor(Number($("d").value))),
    seed: Math.max(0, Math.floor(Number($("seed").value))) >>> 0,
    kind: $("kind").value,
  };
}

// series: [{x, y, color, dots}]
function plot(canvas, series) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  let lo = Infinity, hi = -Infinity;
  for (const s of series) for (const v of s.y) if (Number.isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (!(hi > lo)) { hi = lo + 1; }
  const sx = (x) => pad + x * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - lo) / (hi - lo)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(hi.toPrecision(4), 2, pad + 4);
  ctx.fillText(lo.toPrecision(4), 2, h - pad);
  ctx.fillText("0", pad - 3, h - pad + 14);
  ctx.fillText("1", w - pad - 3, h - pad + 14);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    if (s.dots) {
      s.x.forEach((x, i) => { ctx.beginPath(); ctx.arc(sx(x), sy(s.y[i]), 3.5, 0, 2 * Math.PI); ctx.fill(); });
      continue;
    }
    ctx.beginPath();
    s.x.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(s.y[i])) : ctx.moveTo(sx(x), sy(s.y[i]))));
    ctx.stroke();
  }
}

function guard(outId, f) {
  const out = $(outId);
  try {
    out.classList.remove("err");
    f(out);
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function runPath() {
  guard("path-out", (out) => {
    const p = params();
    const r = simulateReconstruct(p.kind, p.a, p.d, p.seed, 1025);
    const t = r.t;
    plot($("path-canvas"), [
      { x: t, y: r.path, color: COLORS[0] },
      { x: t, y: r.reconstructed, color: COLORS[1] },
      { x: r.grid, y: r.observations, color: "#000", dots: true },
    ]);
    out.textContent = `sup |path - reconstruction| = ${r.supError.toPrecision(4)} (blue: path, red: reconstruction)`;
    r.free();
  });
}

function runMse() {
  guard("mse-out", (out) => {
    const p = params();
    const flat = mseCurve(p.a, p.d, 201);
    const x = [], y = [];
    for (let i = 0; i < flat.length; i += 2) { x.push(flat[i]); y.push(flat[i + 1]); }
    plot($("mse-canvas"), [{ x, y, color: COLORS[2] }]);
    out.textContent = `max MSE ${Math.max(...y).toPrecision(4)} over [0, 1]`;
  });
}

function runWeights() {
  guard("weights-out", (out) => {
    const p = params();
    const n = 401;
    const table = weightFunctions(p.a, p.d, n);
    const x = Array.from({ length: n }, (_, k) => k / (n - 1));
    const series = [];
    for (let i = 0; i <= p.d; i++) {
      series.push({ x, y: Array.from(table.subarray(i * n, (i + 1) * n)), color: COLORS[i % COLORS.length] });
    }
    plot($("weights-canvas"), series);
    out.textContent = `${p.d + 1} weight functions g_0 ... g_${p.d}`;
  });
}

await init();
$("a").addEventListener("input", () => { $("a-val").textContent = $("a").value; });
$("run-path").addEventListener("click", runPath);
$("run-mse").addEventListener("click", runMse);
$("run-weights").addEventListener("click", runWeights);
runPath();
