import init, { Explorer } from "./pkg/toral_markov_web.js";

const canvas = document.getElementById("view");
const ctx = canvas.getContext("2d");
const W = canvas.width;
const $ = (id) => document.getElementById(id);

let explorer = null;
let base = null; // the drawn partition, reused under overlays
let last = [0.3137, 0.7213];

const px = ([x, y]) => [x * W, (1 - y) * W];

function hue(k) {
  return (k * 137.508) % 360;
}

function path(poly) {
  ctx.beginPath();
  poly.forEach((v, i) => (i ? ctx.lineTo(...px(v)) : ctx.moveTo(...px(v))));
  ctx.closePath();
}

function drawPartition() {
  const buf = explorer.polygons();
  ctx.clearRect(0, 0, W, W);
  ctx.lineWidth = 0.5;
  ctx.strokeStyle = "rgba(0,0,0,0.35)";
  for (let i = 0; i < buf.length; i += 10) {
    const poly = [0, 1, 2, 3].map((j) => [buf[i + 2 + 2 * j], buf[i + 3 + 2 * j]]);
    path(poly);
    ctx.fillStyle = `hsl(${hue(buf[i + 1])} 55% 78%)`;
    ctx.fill();
    ctx.stroke();
  }
  base = ctx.getImageData(0, 0, W, W);
}

function build() {
  const m = ["a", "b", "c", "d"].map((id) => parseInt($(id).value, 10));
  const beta = parseFloat($("beta").value);
  $("status").textContent = "building...";
  // let the status repaint before the synchronous build
  setTimeout(() => {
    try {
      const t = performance.now();
      explorer?.free();
      explorer = new Explorer(...m, beta);
      drawPartition();
      const ms = Math.round(performance.now() - t);
      $("status").textContent =
        `${explorer.cells()} cells, ${explorer.transitions()} transitions, ` +
        `lambda_u ${explorer.lambda_u().toFixed(6)} (${ms} ms)`;
    } catch (e) {
      explorer = null;
      $("status").textContent = `error: ${e.message ?? e}`;
    }
  }, 10);
}

function code(x, y) {
  last = [x, y];
  ctx.putImageData(base, 0, 0);
  const r = JSON.parse(explorer.code(x, y, parseInt($("depth").value, 10)));
  if (r.kind === "word") {
    ctx.lineWidth = 2;
    ctx.strokeStyle = "#333";
    r.cell.forEach((p) => (path(p), ctx.stroke()));
    ctx.fillStyle = "rgba(200,30,30,0.6)";
    r.cylinder.forEach((p) => (path(p), ctx.fill()));
    $("code").textContent =
      `point  ${x.toFixed(6)}, ${y.toFixed(6)}\n` +
      `word   ${r.word.join(",")}\n` +
      `centre ${r.center.map((v) => v.toFixed(9)).join(", ")}\n` +
      `diam   ${r.diameter.toExponential(3)}`;
  } else if (r.kind === "boundary") {
    $("code").textContent = `boundary hit at step ${r.step}: cells ${r.candidates.join(",")}`;
  } else {
    $("code").textContent = r.message;
  }
  dot(last, "#000", 3);
}

function dot(v, colour, radius) {
  ctx.fillStyle = colour;
  ctx.beginPath();
  ctx.arc(...px(v), radius, 0, 2 * Math.PI);
  ctx.fill();
}

function shadowOrbit() {
  ctx.putImageData(base, 0, 0);
  try {
    const seed = (Math.random() * 2 ** 32) >>> 0;
    const half = parseInt($("half").value, 10);
    const r = JSON.parse(explorer.shadow(...last, half, parseFloat($("delta").value), seed));
    r.pseudo.forEach((v) => dot(v, "rgba(30,60,200,0.8)", 4));
    r.orbit.forEach((v) => dot(v, "rgba(220,120,0,1)", 2));
    $("shadowout").textContent =
      `blue: noisy orbit, orange: exact orbit\n` +
      `step noise ${r.delta.toExponential(3)}\n` +
      `certified distance ${r.beta.toExponential(3)}\n` +
      `checked over the window: ${r.verified}`;
  } catch (e) {
    $("shadowout").textContent = `error: ${e.message ?? e}`;
  }
}

canvas.addEventListener("click", (ev) => {
  if (!explorer) return;
  const rect = canvas.getBoundingClientRect();
  const x = (ev.clientX - rect.left) / rect.width;
  const y = 1 - (ev.clientY - rect.top) / rect.height;
  code(x, y);
});
$("build").addEventListener("click", build);
$("shadow").addEventListener("click", () => explorer && shadowOrbit());

await init();
build();
