import init, { ratio_curves, rrqr_bounds, sim2_order } from "./pkg/lagfactor_demo.js";

const COLORS = { rrqr: "#1f77b4", evd: "#d62728", pca: "#2ca02c" };

const num = (id) => Number(document.getElementById(id).value);

function show(id, text, isError = false) {
  const el = document.getElementById(id);
  el.textContent = text;
  el.className = isError ? "err" : "";
}

function axes(ctx, w, h, pad, ymax, xs) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(ymax.toPrecision(3), 4, pad / 2 + 10);
  ctx.fillText("0", pad - 12, h - pad);
  xs.forEach((label, i) => {
    const x = pad + ((i + 0.5) * (w - 1.5 * pad)) / xs.length;
    ctx.fillText(String(label), x - 4, h - pad + 16);
  });
}

// Line plot of several series with optional error whiskers.
function plotSeries(canvas, series) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  const len = Math.max(...series.map((s) => s.mean.length));
  const finite = series.flatMap((s) => s.mean.map((m, i) => m + (s.std ? s.std[i] : 0))).filter(Number.isFinite);
  const ymax = Math.max(...finite, 1e-12) * 1.05;
  axes(ctx, w, h, pad, ymax, Array.from({ length: len }, (_, i) => i + 1));
  const px = (i) => pad + ((i + 0.5) * (w - 1.5 * pad)) / len;
  const py = (v) => h - pad - (Math.min(v, ymax) / ymax) * (h - 1.5 * pad);
  series.forEach((s, k) => {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    ctx.beginPath();
    s.mean.forEach((m, i) => (i ? ctx.lineTo(px(i), py(m)) : ctx.moveTo(px(i), py(m))));
    ctx.stroke();
    s.mean.forEach((m, i) => {
      ctx.fillRect(px(i) - 2, py(m) - 2, 4, 4);
      if (s.std) {
        ctx.beginPath();
        ctx.moveTo(px(i) + 2 * k, py(Math.max(m - s.std[i], 0)));
        ctx.lineTo(px(i) + 2 * k, py(m + s.std[i]));
        ctx.stroke();
      }
    });
    ctx.fillText(s.label, w - 140, 20 + 16 * k);
  });
}

function runCurves() {
  try {
    const r = JSON.parse(ratio_curves(num("c-k"), num("c-n"), num("c-trials"), num("c-seed")));
    plotSeries(
      document.getElementById("c-plot"),
      r.curves.map((c) => ({ label: `${c.method} (peak ${c.peak})`, mean: c.mean, std: c.std, color: COLORS[c.method] })),
    );
    const lines = r.curves.map((c) => {
      const rel = c.std[0] / c.mean[0];
      return `${c.method}: peak at i=${c.peak}, p_hat=1 in ${(100 * c.hit_rate).toFixed(0)}% of trials, relative std at i=1 ${rel.toFixed(3)}`;
    });
    show("c-out", lines.join("\n"));
  } catch (e) {
    show("c-out", String(e), true);
  }
}

function runBounds() {
  try {
    const r = JSON.parse(rrqr_bounds(num("b-rows"), num("b-cols"), num("b-rank"), num("b-decay"), num("b-seed")));
    const canvas = document.getElementById("b-plot");
    const ctx = canvas.getContext("2d");
    const { width: w, height: h } = canvas;
    const pad = 40;
    const values = r.results.flatMap((x) => [x.r11_min_sv, x.r22_max_sv]).concat([r.r11_floor, r.r22_ceiling]);
    const ymax = Math.max(...values) * 1.1;
    axes(ctx, w, h, pad, ymax, []);
    const py = (v) => h - pad - (v / ymax) * (h - 1.5 * pad);
    const slot = (w - 1.5 * pad) / r.results.length;
    r.results.forEach((x, i) => {
      const x0 = pad + i * slot + slot * 0.15;
      const bw = slot * 0.3;
      ctx.fillStyle = "#1f77b4";
      ctx.fillRect(x0, py(x.r11_min_sv), bw, h - pad - py(x.r11_min_sv));
      ctx.fillStyle = "#ff7f0e";
      ctx.fillRect(x0 + bw, py(x.r22_max_sv), bw, h - pad - py(x.r22_max_sv));
      ctx.fillStyle = "#444";
      ctx.fillText(x.algorithm, x0, h - pad + 16);
    });
    ctx.setLineDash([5, 4]);
    for (const [v, c, label] of [
      [r.r11_floor, "#1f77b4", "floor for sigma_min(R11)"],
      [r.r22_ceiling, "#ff7f0e", "ceiling for sigma_max(R22)"],
    ]) {
      ctx.strokeStyle = ctx.fillStyle = c;
      ctx.beginPath();
      ctx.moveTo(pad, py(v));
      ctx.lineTo(w - pad / 2, py(v));
      ctx.stroke();
      ctx.fillText(label, w - 200, py(v) - 4);
    }
    ctx.setLineDash([]);
    const sv = r.singular_values.map((s) => s.toPrecision(4)).join(", ");
    const lines = r.results.map(
      (x) => `${x.algorithm}: sigma_min(R11)=${x.r11_min_sv.toPrecision(5)} sigma_max(R22)=${x.r22_max_sv.toPrecision(5)} sweeps=${x.sweeps} perm=[${x.permutation.join(",")}]`,
    );
    show("b-out", `singular values: ${sv}\n${lines.join("\n")}`);
  } catch (e) {
    show("b-out", String(e), true);
  }
}

function runOrder() {
  try {
    const r = JSON.parse(sim2_order(num("o-k"), num("o-n"), num("o-scale"), num("o-w"), num("o-seed")));
    plotSeries(document.getElementById("o-plot"), [
      { label: `rrqr p_hat=${r.rrqr}`, mean: r.rrqr_ratios, color: COLORS.rrqr },
      { label: `evd p_hat=${r.evd}`, mean: r.evd_ratios, color: COLORS.evd },
    ]);
    show("o-out", `true p=${r.true_p}   rrqr=${r.rrqr}   evd=${r.evd}   pca=${r.pca}`);
  } catch (e) {
    show("o-out", String(e), true);
  }
}

await init();
document.getElementById("c-run").addEventListener("click", runCurves);
document.getElementById("b-run").addEventListener("click", runBounds);
document.getElementById("o-run").addEventListener("click", runOrder);
runBounds();
runOrder();
