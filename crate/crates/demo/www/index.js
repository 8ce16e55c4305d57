import init, { trajectory, spectrum, sweep } from "./pkg/acom_demo.js";

const $ = (id) => document.getElementById(id);
const canvas = $("plot");
const ctx = canvas.getContext("2d");

function num(id) {
  const v = $(id).value.trim();
  return v === "" ? undefined : Number(v);
}

function request() {
  const id = $("game").value;
  const params = {
    quadratic: { a_xx: [[num("axx")]], a_yy: [[num("ayy")]], b: [[num("b")]] },
    bilinear: { b: [[num("b")]] },
    dirac: {},
  }[id];
  const req = {
    game: { id, params },
    rule: $("rule").value,
    lr: num("lr"),
    eps: num("eps"),
    gamma: num("gamma"),
    start: { x: [num("x0")], y: [num("y0")] },
    steps: num("steps"),
  };
  return JSON.stringify(req);
}

function status(text, isError = false) {
  $("status").textContent = text;
  $("status").className = isError ? "error" : "";
}

function call(fn) {
  try {
    return JSON.parse(fn(request()));
  } catch (e) {
    status(String(e.message ?? e), true);
    return null;
  }
}

// Axes fitted to the data, drawn into the rectangle [x0, x0 + w] × [y0, y0 + h].
function frame(x0, y0, w, h, xs, ys, { logX = false, logY = false, square = false } = {}) {
  const tx = logX ? Math.log10 : (v) => v;
  const ty = logY ? Math.log10 : (v) => v;
  const fx = xs.map(tx).filter(Number.isFinite);
  const fy = ys.map(ty).filter(Number.isFinite);
  let [xmin, xmax] = [Math.min(...fx), Math.max(...fx)];
  let [ymin, ymax] = [Math.min(...fy), Math.max(...fy)];
  if (square) {
    const r = Math.max(xmax - xmin, ymax - ymin) / 2 || 1;
    const [cx, cy] = [(xmin + xmax) / 2, (ymin + ymax) / 2];
    [xmin, xmax, ymin, ymax] = [cx - r, cx + r, cy - r, cy + r];
  }
  const padX = (xmax - xmin || 1) * 0.08;
  const padY = (ymax - ymin || 1) * 0.08;
  xmin -= padX; xmax += padX; ymin -= padY; ymax += padY;
  ctx.strokeStyle = "#999";
  ctx.strokeRect(x0, y0, w, h);
  return {
    px: (v) => x0 + ((tx(v) - xmin) / (xmax - xmin)) * w,
    py: (v) => y0 + h - ((ty(v) - ymin) / (ymax - ymin)) * h,
    label(text, sub) {
      ctx.fillStyle = "#333";
      ctx.fillText(text, x0 + 6, y0 + 14);
      if (sub) ctx.fillText(sub, x0 + 6, y0 + 28);
    },
  };
}

function polyline(f, xs, ys, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  let started = false;
  xs.forEach((x, i) => {
    const [a, b] = [f.px(x), f.py(ys[i])];
    if (!Number.isFinite(a) || !Number.isFinite(b)) return;
    started ? ctx.lineTo(a, b) : ctx.moveTo(a, b);
    started = true;
  });
  ctx.stroke();
}

function dots(f, xs, ys, color, r = 3) {
  ctx.fillStyle = color;
  xs.forEach((x, i) => {
    ctx.beginPath();
    ctx.arc(f.px(x), f.py(ys[i]), r, 0, 2 * Math.PI);
    ctx.fill();
  });
}

function clear() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "12px system-ui, sans-serif";
}

function drawTrajectory() {
  const t = call(trajectory);
  if (!t) return;
  clear();
  const phase = frame(10, 10, 440, 420, t.x, t.y, { square: true });
  phase.label("phase portrait (x₀, y₀)");
  polyline(phase, t.x, t.y, "#1f77b4");
  dots(phase, [t.x[0]], [t.y[0]], "#2ca02c", 4);
  dots(phase, [t.x.at(-1)], [t.y.at(-1)], "#d62728", 4);
  const steps = t.vf_norm.map((_, i) => i);
  const curve = frame(480, 10, 450, 420, steps, t.vf_norm, { logY: true });
  curve.label("‖V(p)‖ per step (log scale)");
  polyline(curve, steps, t.vf_norm, "#ff7f0e");
  status(`converged: ${t.converged}, steps: ${t.steps}, final ‖V‖ = ${t.vf_norm.at(-1).toExponential(3)}`);
}

function drawSpectrum() {
  const r = call(spectrum);
  if (!r) return;
  clear();
  const h = r.h_used;
  // Eigenvalues of the step map I + hA against the unit circle.
  const mapped = r.eigs_a.map(([re, im]) => [1 + h * re, h * im]);
  const circle = Array.from({ length: 129 }, (_, k) => (2 * Math.PI * k) / 128);
  const xs = mapped.map((p) => p[0]).concat([-1.05, 1.05]);
  const ys = mapped.map((p) => p[1]).concat([-1.05, 1.05]);
  const f = frame(10, 10, 440, 420, xs, ys, { square: true });
  f.label("eigenvalues of I + hA", "inside the circle ⇒ contraction");
  polyline(f, circle.map(Math.cos), circle.map(Math.sin), "#999");
  dots(f, mapped.map((p) => p[0]), mapped.map((p) => p[1]), r.certified ? "#2ca02c" : "#d62728");
  const v = r.eigs_vprime;
  const g = frame(480, 10, 450, 420, v.map((p) => p[0]).concat([0]), v.map((p) => p[1]).concat([0]), { square: true });
  g.label("eigenvalues of V′");
  polyline(g, [0, 0], [-1e9, 1e9], "#ccc");
  dots(g, v.map((p) => p[0]), v.map((p) => p[1]), "#1f77b4");
  const bound = r.h_bound.kind === "finite" ? r.h_bound.value.toPrecision(6) : r.h_bound.kind;
  const lines = [
    `map: ${r.analyzed_map}, h = ${h}, spectral radius = ${r.spectral_radius_f.toPrecision(8)}`,
    `step-size bound: ${bound}, certified: ${r.certified}`,
    ...r.warnings,
  ];
  status(lines.join("\n"));
}

function drawSweep() {
  const s = call(sweep);
  if (!s) return;
  clear();
  const hs = s.rows.map((r) => r.h);
  const pred = s.rows.map((r) => r.predicted_rate);
  const emp = s.rows.map((r) => r.empirical_rate);
  const f = frame(10, 10, 920, 420, hs.concat([hs[0], hs.at(-1)]), pred.concat(emp, [1, 1]), {
    logX: true,
    logY: true,
  });
  f.label("spectral radius (line) vs fitted contraction (dots) against h", "grey line: rate 1");
  polyline(f, [hs[0], hs.at(-1)], [1, 1], "#999");
  polyline(f, hs, pred, "#1f77b4");
  dots(f, hs, emp.map((e) => (Number.isFinite(e) ? e : NaN)), "#ff7f0e", 4);
  const agree = s.rows.filter((r) => r.agree).length;
  status(`critical step size ${s.h_crit.toPrecision(6)}; prediction and run agree on ${agree}/${s.rows.length} cells`);
}

function syncGameInputs() {
  const id = $("game").value;
  for (const k of ["axx", "ayy"]) $(k).disabled = id !== "quadratic";
  $("b").disabled = id === "dirac";
}

await init();
$("game").addEventListener("change", syncGameInputs);
$("run-trajectory").addEventListener("click", drawTrajectory);
$("run-spectrum").addEventListener("click", drawSpectrum);
$("run-sweep").addEventListener("click", () => {
  status("sweeping…");
  setTimeout(drawSweep, 0);
});
syncGameInputs();
status("ready");
