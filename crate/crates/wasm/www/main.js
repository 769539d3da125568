import init, { Dataset, gstCurve, gstThreshold } from "./pkg/anchor_mvc_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let data = null;

function bounds(points) {
  let [x0, y0, x1, y1] = [Infinity, Infinity, -Infinity, -Infinity];
  for (let i = 0; i < points.length; i += 2) {
    x0 = Math.min(x0, points[i]); x1 = Math.max(x1, points[i]);
    y0 = Math.min(y0, points[i + 1]); y1 = Math.max(y1, points[i + 1]);
  }
  const pad = 0.05 * Math.max(x1 - x0, y1 - y0, 1e-9);
  return [x0 - pad, y0 - pad, x1 + pad, y1 + pad];
}

function drawView(canvas, points, colors, anchors, anchorColors, edges) {
  const ctx = canvas.getContext("2d");
  const [x0, y0, x1, y1] = bounds(points);
  const s = Math.min(canvas.width / (x1 - x0), canvas.height / (y1 - y0));
  const X = (x) => (x - x0) * s;
  const Y = (y) => canvas.height - (y - y0) * s;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  if (edges && anchors) {
    ctx.strokeStyle = "rgba(0,0,0,0.12)";
    ctx.beginPath();
    for (let e = 0; e < edges.length; e += 3) {
      const i = edges[e], j = edges[e + 1];
      ctx.moveTo(X(points[2 * i]), Y(points[2 * i + 1]));
      ctx.lineTo(X(anchors[2 * j]), Y(anchors[2 * j + 1]));
    }
    ctx.stroke();
  }
  for (let i = 0; i < points.length / 2; i++) {
    ctx.fillStyle = COLORS[colors[i] % COLORS.length];
    ctx.beginPath();
    ctx.arc(X(points[2 * i]), Y(points[2 * i + 1]), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  if (anchors) {
    for (let j = 0; j < anchors.length / 2; j++) {
      ctx.fillStyle = COLORS[anchorColors[j] % COLORS.length];
      ctx.strokeStyle = "#000";
      ctx.fillRect(X(anchors[2 * j]) - 4, Y(anchors[2 * j + 1]) - 4, 8, 8);
      ctx.strokeRect(X(anchors[2 * j]) - 4, Y(anchors[2 * j + 1]) - 4, 8, 8);
    }
  }
}

function viewCanvases(count) {
  const holder = $("views");
  while (holder.children.length < count) {
    const c = document.createElement("canvas");
    c.width = 300; c.height = 300;
    holder.appendChild(c);
  }
  return [...holder.children].slice(0, count);
}

function generate() {
  try {
    data?.free();
    data = Dataset.synthetic(num("n"), num("k"), num("sep"), num("noise"), num("corrupt"), num("seed"));
  } catch (e) {
    $("status").textContent = e.message;
    return;
  }
  const truth = data.labels();
  viewCanvases(data.nViews).forEach((c, v) => drawView(c, data.points(v), truth));
  $("metrics").innerHTML = "";
  $("status").textContent = `${data.nSamples} samples, ${data.nViews} views, coloured by ground truth`;
}

function drawResiduals(values) {
  const canvas = $("resid"), ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const logs = Array.from(values, (v) => Math.log10(Math.max(v, 1e-16)));
  const lo = Math.min(...logs), hi = Math.max(...logs, lo + 1);
  ctx.strokeStyle = "#1f77b4";
  ctx.beginPath();
  logs.forEach((l, i) => {
    const x = (i / Math.max(logs.length - 1, 1)) * (canvas.width - 40) + 35;
    const y = canvas.height - 15 - ((l - lo) / (hi - lo)) * (canvas.height - 30);
    i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
  });
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(`1e${hi.toFixed(0)}`, 2, 15);
  ctx.fillText(`1e${lo.toFixed(0)}`, 2, canvas.height - 15);
  ctx.fillText("max residual per iteration", 60, 12);
}

function cluster() {
  if (!data) generate();
  $("status").textContent = "clustering...";
  setTimeout(() => {
    let result;
    const t0 = performance.now();
    try {
      result = data.cluster(num("k"), num("m"), num("nb"), num("p"), num("alpha"), num("beta"),
        $("adaptive").checked, num("iters"), num("seed"));
    } catch (e) {
      $("status").textContent = e.message;
      return;
    }
    const ms = performance.now() - t0;
    const labels = result.labels(), anchorLabels = result.anchorLabels(), edges = result.edges();
    viewCanvases(data.nViews).forEach((c, v) =>
      drawView(c, data.points(v), labels, result.anchorPoints(v), anchorLabels, edges));
    drawResiduals(result.residuals());

    const names = ["ACC", "NMI", "Purity", "PRE", "REC", "F-score", "ARI"];
    const m = result.metrics();
    const xi = Array.from(result.xi(), (x) => x.toFixed(3)).join(", ");
    $("metrics").innerHTML =
      "<tr>" + names.map((n) => `<th>${n}</th>`).join("") + "</tr>" +
      "<tr>" + Array.from(m, (x) => `<td>${x.toFixed(4)}</td>`).join("") + "</tr>";
    $("status").textContent =
      `${result.residuals().length} iterations, converged: ${result.converged}, ` +
      `components: ${result.rawComponents}, forced edits: ${result.forcedEdits}, ` +
      `view weights: [${xi}], ${ms.toFixed(0)} ms`;
    result.free();
  }, 20);
}

function drawGst() {
  const tau = num("tau"), p = num("gp");
  $("tauv").textContent = tau.toFixed(2);
  $("gpv").textContent = p.toFixed(2);
  const canvas = $("gst"), ctx = canvas.getContext("2d");
  const smax = 3;
  const curve = gstCurve(tau, p, smax, 200);
  const X = (s) => 20 + (s / smax) * (canvas.width - 30);
  const Y = (d) => canvas.height - 20 - (d / smax) * (canvas.height - 30);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath(); ctx.moveTo(X(0), Y(0)); ctx.lineTo(X(smax), Y(smax)); ctx.stroke();
  ctx.strokeStyle = "#d62728";
  ctx.beginPath();
  for (let i = 0; i < curve.length; i += 2) {
    i ? ctx.lineTo(X(curve[i]), Y(curve[i + 1])) : ctx.moveTo(X(curve[i]), Y(curve[i + 1]));
  }
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(`zero below σ = ${gstThreshold(tau, p).toFixed(3)}`, 25, 14);
}

await init();
$("generate").onclick = generate;
$("cluster").onclick = cluster;
$("tau").oninput = drawGst;
$("gp").oninput = drawGst;
generate();
drawGst();
