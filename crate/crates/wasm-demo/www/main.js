// Page logic for the normlab demo. Expects the wasm-bindgen output in ./pkg/.
import init, { digits, series, blocks } from "./pkg/normlab_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function source() {
  const v = $("source").value;
  return v === "custom" ? $("custom").value : v;
}

function run(outId, fn) {
  const out = $(outId);
  out.classList.remove("error");
  const t0 = performance.now();
  try {
    fn();
    $("status").textContent = `done in ${(performance.now() - t0).toFixed(0)} ms`;
  } catch (e) {
    out.textContent = String(e);
    out.classList.add("error");
    $("status").textContent = "";
  }
}

// Resize the canvas backing store to its CSS size and return a 2D context.
function context(canvas) {
  const r = canvas.getBoundingClientRect();
  const dpr = window.devicePixelRatio || 1;
  canvas.width = Math.round(r.width * dpr);
  canvas.height = Math.round(r.height * dpr);
  const ctx = canvas.getContext("2d");
  ctx.scale(dpr, dpr);
  ctx.clearRect(0, 0, r.width, r.height);
  ctx.font = "11px system-ui, sans-serif";
  return { ctx, w: r.width, h: r.height };
}

const PAD = { l: 56, r: 12, t: 12, b: 26 };

// Line plot of [x, y] series; `logx` spaces x logarithmically.
function plot(canvas, lines, refs, { logx = false } = {}) {
  const { ctx, w, h } = context(canvas);
  const pts = lines.flatMap((l) => l.data);
  if (pts.length === 0) return;
  const fx = logx ? (x) => Math.log10(x) : (x) => x;
  const xs = pts.map((p) => fx(p[0]));
  const ys = pts.map((p) => p[1]).concat(refs.map((r) => r.y));
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  const m = (y1 - y0) * 0.08 || 0.05;
  y0 -= m;
  y1 += m;
  const X = (x) => PAD.l + ((fx(x) - x0) / (x1 - x0)) * (w - PAD.l - PAD.r);
  const Y = (y) => h - PAD.b - ((y - y0) / (y1 - y0)) * (h - PAD.t - PAD.b);

  ctx.strokeStyle = "#ccc";
  ctx.fillStyle = "#555";
  ctx.strokeRect(PAD.l, PAD.t, w - PAD.l - PAD.r, h - PAD.t - PAD.b);
  for (let i = 0; i <= 4; i++) {
    const y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(y.toFixed(4), 4, Y(y) + 4);
  }
  const xlabel = (v) => (logx ? `10^${v.toFixed(1)}` : String(Math.round(v)));
  ctx.fillText(xlabel(x0), PAD.l, h - 8);
  ctx.fillText(xlabel(x1), w - PAD.r - 50, h - 8);

  for (const r of refs) {
    ctx.strokeStyle = r.color;
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(PAD.l, Y(r.y));
    ctx.lineTo(w - PAD.r, Y(r.y));
    ctx.stroke();
    ctx.setLineDash([]);
  }
  for (const l of lines) {
    ctx.strokeStyle = l.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    l.data.forEach(([x, y], i) => (i ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y))));
    ctx.stroke();
  }
}

function bars(canvas, freqs, expected, k) {
  const { ctx, w, h } = context(canvas);
  const top = Math.max(expected, ...freqs) * 1.1;
  const bw = (w - PAD.l - PAD.r) / freqs.length;
  const Y = (y) => h - PAD.b - (y / top) * (h - PAD.t - PAD.b);
  ctx.fillStyle = "#555";
  for (let i = 0; i <= 4; i++) ctx.fillText(((top * i) / 4).toFixed(4), 4, Y((top * i) / 4) + 4);
  ctx.fillStyle = "#1f77b4";
  freqs.forEach((f, i) => ctx.fillRect(PAD.l + i * bw + bw * 0.1, Y(f), bw * 0.8, Y(0) - Y(f)));
  if (freqs.length <= 32) {
    ctx.fillStyle = "#555";
    freqs.forEach((_, i) =>
      ctx.fillText(i.toString(2).padStart(k, "0"), PAD.l + i * bw + 2, h - 8),
    );
  }
  ctx.strokeStyle = "#d62728";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(PAD.l, Y(expected));
  ctx.lineTo(w - PAD.r, Y(expected));
  ctx.stroke();
  ctx.setLineDash([]);
}

function showDigits() {
  run("digits-out", () => {
    $("digits-out").textContent = digits(source(), Number($("digits-n").value));
  });
}

function showSeries() {
  run("series-out", () => {
    const r = JSON.parse(series(source(), Number($("series-n").value)));
    plot($("ones-canvas"), [{ data: r.ones_ratio, color: "#1f77b4" }], [{ y: 0.5, color: "#999" }], {
      logx: true,
    });
    const last = r.ones_ratio[r.ones_ratio.length - 1];
    let text = `${r.source}: ones ratio ${last[1].toFixed(6)} after ${last[0]} digits.`;
    if (r.ns_exact) {
      plot(
        $("ns-canvas"),
        [
          { data: r.ns_exact, color: "#d62728" },
          { data: r.ns_proportion, color: "#2ca02c" },
        ],
        [{ y: r.ns_claimed_limit, color: "#999" }],
      );
      const e = r.ns_exact[r.ns_exact.length - 1];
      text += ` Exact ns ratio at n = ${e[0]}: ${e[1].toFixed(9)} (limit estimate ${r.ns_exact_limit.toFixed(
        9,
      )}, claimed ${r.ns_claimed_limit}).`;
    }
    $("series-out").textContent = text;
  });
}

function showBlocks() {
  run("blocks-out", () => {
    const k = Number($("blocks-k").value);
    const r = JSON.parse(
      blocks(source(), Number($("blocks-n").value), k, $("blocks-disjoint").checked),
    );
    bars($("blocks-canvas"), r.frequencies, r.expected, k);
    $("blocks-out").textContent =
      `${r.source}, k = ${r.k}, ${r.mode} windows: ${r.windows}; expected frequency ${r.expected}; ` +
      `max |freq − 2^-k| = ${r.max_abs_dev.toExponential(3)}, χ² = ${r.chi_square.toFixed(2)}`;
  });
}

$("source").addEventListener("change", () => {
  $("custom-wrap").hidden = $("source").value !== "custom";
});
$("digits-go").addEventListener("click", showDigits);
$("series-go").addEventListener("click", showSeries);
$("blocks-go").addEventListener("click", showBlocks);

await init();
$("status").textContent = "ready";
showDigits();
showSeries();
showBlocks();
