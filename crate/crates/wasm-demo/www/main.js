import init, { mode_trajectory, regularity_profile, misfit_scan } from "./pkg/vofrac_wasm_demo.js";

const num = (id) => Number(document.getElementById(id).value);
const note = (id, text) => { document.getElementById(id).textContent = text; };

function pairs(flat) {
  const out = [];
  for (let i = 0; i + 1 < flat.length; i += 2) out.push([flat[i], flat[i + 1]]);
  return out;
}

function plot(id, points, { logX = false, logY = false, marks = false } = {}) {
  const canvas = document.getElementById(id);
  const ctx = canvas.getContext("2d");
  const pad = 40;
  const fx = logX ? Math.log10 : (v) => v;
  const fy = logY ? Math.log10 : (v) => v;
  const pts = points
    .filter(([x, y]) => (!logX || x > 0) && (!logY || y > 0))
    .map(([x, y]) => [fx(x), fy(y)]);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (pts.length === 0) return;
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (canvas.width - 2 * pad);
  const sy = (y) => canvas.height - pad - ((y - y0) / (y1 - y0 || 1)) * (canvas.height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "11px system-ui";
  const label = (v, log) => (log ? `1e${v.toFixed(1)}` : v.toPrecision(3));
  ctx.fillText(label(x0, logX), pad, canvas.height - pad + 14);
  ctx.fillText(label(x1, logX), canvas.width - pad - 30, canvas.height - pad + 14);
  ctx.fillText(label(y1, logY), 2, pad + 4);
  ctx.fillText(label(y0, logY), 2, canvas.height - pad);

  ctx.strokeStyle = "#1f5fa8";
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
  ctx.stroke();
  if (marks) {
    ctx.fillStyle = "#1f5fa8";
    pts.forEach(([x, y]) => ctx.fillRect(sx(x) - 2, sy(y) - 2, 4, 4));
  }
}

function guarded(noteId, action) {
  return () => {
    try {
      action();
    } catch (e) {
      note(noteId, `error: ${e}`);
    }
  };
}

await init();

document.getElementById("traj-run").onclick = guarded("traj-note", () => {
  const pts = pairs(mode_trajectory(num("traj-a0"), num("traj-a1"), num("traj-k"), num("traj-lambda"), num("traj-m")));
  plot("traj-plot", pts);
  note("traj-note", `u(T) = ${pts[pts.length - 1][1].toPrecision(8)}`);
});

document.getElementById("reg-run").onclick = guarded("reg-note", () => {
  const flat = regularity_profile(num("reg-a0"), num("reg-a1"), num("reg-m"));
  const slope = flat[flat.length - 1];
  plot("reg-plot", pairs(flat.slice(0, -1)), { logX: true, logY: true });
  note("reg-note", `fitted slope ${slope.toFixed(3)} (singular profile expects ${(-num("reg-a0")).toFixed(3)})`);
});

document.getElementById("scan-run").onclick = guarded("scan-note", () => {
  const pts = pairs(misfit_scan(num("scan-truth"), num("scan-lo"), num("scan-hi"), num("scan-step")));
  plot("scan-plot", pts, { logY: true, marks: true });
  const best = pts.reduce((a, b) => (b[1] < a[1] ? b : a));
  note("scan-note", `minimum misfit ${best[1].toExponential(3)} at order ${best[0].toFixed(2)}`);
});
