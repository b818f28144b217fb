import init, { kernel_curve, fit_cantilever, damage_deflection } from "./pkg/beamgp_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// series: [{x, y, color, band?: [lo, hi], points?: true}]
function plot(canvas, series, title) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => (s.band ? [...s.band[0], ...s.band[1]] : s.y));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(title, pad, pad - 10);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 15);
  ctx.fillText(x1.toPrecision(3), w - pad - 20, h - pad + 15);
  if (y0 < 0 && y1 > 0) {
    ctx.beginPath();
    ctx.moveTo(pad, sy(0));
    ctx.lineTo(w - pad, sy(0));
    ctx.stroke();
  }

  for (const s of series) {
    if (s.band) {
      ctx.fillStyle = s.color + "33";
      ctx.beginPath();
      s.x.forEach((x, i) => ctx.lineTo(sx(x), sy(s.band[1][i])));
      [...s.x].reverse().forEach((x, j) => ctx.lineTo(sx(x), sy(s.band[0][s.x.length - 1 - j])));
      ctx.fill();
    }
    if (s.points) {
      ctx.fillStyle = s.color;
      s.x.forEach((x, i) => ctx.fillRect(sx(x) - 2, sy(s.y[i]) - 2, 4, 4));
      continue;
    }
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    s.x.forEach((x, i) => ctx.lineTo(sx(x), sy(s.y[i])));
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

function drawKernel() {
  const r = JSON.parse(kernel_curve(num("k-sigma"), num("k-ell"), num("k-m"), num("k-n"), 400));
  plot($("k-plot"), [{ x: r.x, y: r.k, color: "#1f5fbf" }], `∂^${num("k-m")}_x ∂^${num("k-n")}_x' k(x, 0)`);
}

function drawFit() {
  $("f-out").textContent = "sampling...";
  // let the message paint before the blocking fit
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const r = JSON.parse(fit_cantilever(num("f-snr"), num("f-ndp"), num("f-seed"), num("f-steps")));
      const dt = ((performance.now() - t0) / 1000).toFixed(1);
      const dm = r.d_m === null ? "n/a" : r.d_m.toFixed(3);
      $("f-out").textContent =
        `EI/EI_true: mean ${r.mu_ei.toFixed(4)}, std ${r.sigma_ei.toFixed(4)}, d_M ${dm}\n` +
        `acceptance ${r.acceptance.toFixed(2)}, ${dt} s; normalized RMSE u ${r.fields.u.nrmse.toExponential(2)}, ` +
        `m ${r.fields.m.nrmse.toExponential(2)}`;
      for (const [key, canvas, title] of [["u", "f-u", "deflection u"], ["m", "f-m", "moment m"]]) {
        const f = r.fields[key];
        const lo = f.mean.map((m, i) => m - 2 * f.std[i]);
        const hi = f.mean.map((m, i) => m + 2 * f.std[i]);
        const series = [
          { x: r.x, y: f.mean, color: "#1f5fbf", band: [lo, hi] },
          { x: r.x, y: f.truth, color: "#c0392b", dash: [5, 4] },
        ];
        if (key === "u") series.push({ x: r.data.x, y: r.data.y, color: "#222", points: true });
        plot($(canvas), series, `${title}: mean ± 2 std (blue), truth (red)`);
      }
    } catch (e) {
      $("f-out").textContent = `error: ${e}`;
    }
  }, 20);
}

function drawDamage() {
  const el = num("d-el");
  const red = num("d-red");
  $("d-label").textContent = `element ${el}, ${Math.round(red * 100)}% stiffness loss`;
  const r = JSON.parse(damage_deflection(el, red, 20));
  plot($("d-plot"), [
    { x: r.x, y: r.intact, color: "#888", dash: [5, 4] },
    { x: r.x, y: r.damaged, color: "#c0392b" },
  ], "deflection: intact (grey), damaged (red)");
}

await init();
$("k-run").onclick = drawKernel;
$("f-run").onclick = drawFit;
$("d-el").oninput = drawDamage;
$("d-red").oninput = drawDamage;
drawKernel();
drawDamage();
