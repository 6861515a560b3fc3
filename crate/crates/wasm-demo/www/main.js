import init, { generateMosaic, segmentMosaic } from "./pkg/texseg_wasm_demo.js";

const $ = (id) => document.getElementById(id);
let mosaic = null;
let picked = null;

function status(text, isError = false) {
  $("status").textContent = text;
  $("status").className = isError ? "error" : "";
}

function paint(canvas, side, gray) {
  canvas.width = side;
  canvas.height = side;
  const ctx = canvas.getContext("2d");
  const image = ctx.createImageData(side, side);
  for (let i = 0; i < gray.length; i++) {
    image.data.set([gray[i], gray[i], gray[i], 255], 4 * i);
  }
  ctx.putImageData(image, 0, 0);
}

function clear(canvas) {
  canvas.getContext("2d").clearRect(0, 0, canvas.width, canvas.height);
}

function fillTable(table, values, m) {
  table.replaceChildren();
  const side = 2 * m + 1;
  for (let r = 0; r < side; r++) {
    const row = table.insertRow();
    for (let c = 0; c < side; c++) {
      const v = values[r * side + c];
      row.insertCell().textContent = v === undefined ? "" : v.toFixed(3);
    }
  }
}

function inspect() {
  if (!mosaic || !picked) return;
  const m = Number($("lag").value);
  const [row, col] = picked;
  fillTable($("observed"), mosaic.feature_at(row, col, m), m);
  fillTable($("expected"), mosaic.true_feature_at(row, col, m), m);
  $("pixel").textContent = `Pixel (${row}, ${col}) in region ${mosaic.region_at(row, col)}; lags -${m}..${m} in both directions.`;
}

function generate() {
  try {
    const models = $("models").value;
    if ($("geometry").value === "quadrants" && models.split(",").length !== 4) {
      $("models").value = "ma1,ma2,ma3,ma4";
      $("k").value = 4;
    }
    mosaic?.free();
    mosaic = generateMosaic($("models").value, $("geometry").value, Number($("size").value), 2, Number($("seed").value));
    const side = mosaic.side();
    paint($("mosaic"), side, mosaic.gray());
    paint($("truth"), side, mosaic.truth_gray());
    clear($("labels"));
    picked = null;
    status(`Generated a ${side}x${side} mosaic.`);
  } catch (e) {
    status(String(e.message ?? e), true);
  }
}

function segment() {
  if (!mosaic) generate();
  if (!mosaic) return;
  status("Segmenting...");
  // let the status line paint before the synchronous run
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const seg = segmentMosaic(mosaic, $("algorithm").value, Number($("k").value), Number($("m").value),
        $("location").checked, Number($("seed").value));
      paint($("labels"), mosaic.side(), seg.gray());
      const acc = Number.isNaN(seg.accuracy()) ? "not scored" : seg.accuracy().toFixed(4);
      status(`${seg.clusters()} clusters, patch half-width ${seg.half_width()}, accuracy ${acc}, ` +
        `${Math.round(performance.now() - t0)} ms.`);
      seg.free();
    } catch (e) {
      status(String(e.message ?? e), true);
    }
  }, 10);
}

$("mosaic").addEventListener("click", (event) => {
  if (!mosaic) return;
  const rect = event.target.getBoundingClientRect();
  const side = mosaic.side();
  const col = Math.floor(((event.clientX - rect.left) / rect.width) * side);
  const row = Math.floor(((event.clientY - rect.top) / rect.height) * side);
  picked = [Math.min(row, side - 1), Math.min(col, side - 1)];
  inspect();
});
$("lag").addEventListener("change", inspect);
$("generate").addEventListener("click", generate);
$("segment").addEventListener("click", segment);

await init();
generate();
