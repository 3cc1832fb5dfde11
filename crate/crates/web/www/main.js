import init, { predictionCurve, monteCarlo, pointerCurve } from "./pkg/weakcollapse_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const amps = () => [num("a_re"), num("a_im"), num("b_re"), num("b_im")];

function frame(canvas, xs, ys, { logx = false } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 48;
  ctx.clearRect(0, 0, w, h);
  const fx = logx ? Math.log10 : (x) => x;
  let [x0, x1] = [Math.min(...xs.map(fx)), Math.max(...xs.map(fx))];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  const dy = 0.08 * (y1 - y0);
  y0 -= dy; y1 += dy;
  const px = (x) => pad + (fx(x) - x0) / (x1 - x0) * (w - 2 * pad);
  const py = (y) => h - pad + (y0 - y) / (y1 - y0) * (h - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  for (let k = 0; k <= 4; k++) {
    const y = y0 + (y1 - y0) * k / 4;
    ctx.fillText(y.toPrecision(3), 4, py(y) + 4);
    const xv = x0 + (x1 - x0) * k / 4;
    ctx.fillText(logx ? "1e" + xv.toFixed(1) : xv.toPrecision(3), pad + (w - 2 * pad) * k / 4 - 12, h - pad + 18);
  }
  return { ctx, px, py };
}

function line(plot, xs, ys, color, dash = []) {
  const { ctx, px, py } = plot;
  ctx.strokeStyle = color;
  ctx.setLineDash(dash);
  ctx.lineWidth = 2;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(ys[i])) : ctx.moveTo(px(x), py(ys[i]))));
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawCurve() {
  const pts = JSON.parse(predictionCurve(...amps(), 2.0, 81));
  const xs = pts.map((p) => p.ratio);
  const plot = frame($("curve"), xs, pts.flatMap((p) => [p.vn, p.objective]));
  line(plot, xs, pts.map((p) => p.vn), "#1f5fbf");
  line(plot, xs, pts.map((p) => p.objective), "#c0392b");
}

function drawMonteCarlo() {
  const res = JSON.parse(monteCarlo(...amps(), num("ratio"), $("model").value === "objective",
    Math.max(0, Math.floor(num("seed"))), Math.floor(num("decades"))));
  const xs = res.points.map((p) => p.trials);
  const lo = res.points.map((p) => p.mean - 2 * p.stderr);
  const hi = res.points.map((p) => p.mean + 2 * p.stderr);
  const plot = frame($("mc"), xs, [...lo, ...hi, res.target.re], { logx: true });
  line(plot, xs, xs.map(() => res.target.re), "#555", [6, 4]);
  line(plot, xs, lo, "#aaa");
  line(plot, xs, hi, "#aaa");
  line(plot, xs, res.points.map((p) => p.mean), "#c0392b");
}

function drawPointer() {
  const res = JSON.parse(pointerCurve(...amps(), num("glog"), 60));
  const xs = res.points.map((p) => p[0]);
  const ys = res.points.map((p) => p[1]);
  const plot = frame($("pointer"), xs, [...ys, res.weak_value.re], { logx: true });
  line(plot, xs, xs.map(() => res.weak_value.re), "#555", [6, 4]);
  line(plot, xs, ys, "#1f5fbf");
}

function guarded(f) {
  return () => {
    try {
      f();
      $("status").textContent = "";
    } catch (e) {
      $("status").textContent = String(e.message ?? e);
    }
  };
}

await init();
const redraw = guarded(() => { drawCurve(); drawPointer(); drawMonteCarlo(); });
for (const id of ["a_re", "a_im", "b_re", "b_im"]) $(id).addEventListener("change", redraw);
$("glog").addEventListener("change", guarded(drawPointer));
$("run").addEventListener("click", guarded(drawMonteCarlo));
redraw();
