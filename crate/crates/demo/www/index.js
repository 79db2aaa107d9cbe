// Expects the wasm-bindgen output in ./pkg (see the README).
import init, { phantom_sinogram, phantom_reconstruction, boundary_trace } from "./pkg/raybound_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function gray(canvas, values, cols, rows) {
  const ctx = canvas.getContext("2d");
  let lo = Infinity, hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  }
  const span = hi > lo ? hi - lo : 1;
  const img = ctx.createImageData(cols, rows);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const v = Math.round(255 * (values[r * cols + c] - lo) / span);
      const k = 4 * ((rows - 1 - r) * cols + c);
      img.data[k] = img.data[k + 1] = img.data[k + 2] = v;
      img.data[k + 3] = 255;
    }
  }
  const tmp = new OffscreenCanvas(cols, rows);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
  return [lo, hi];
}

function timed(status, f) {
  status.textContent = "running...";
  // let the status repaint before the blocking call
  setTimeout(() => {
    const t = performance.now();
    try {
      const msg = f();
      status.textContent = `${msg} (${((performance.now() - t) / 1000).toFixed(2)} s)`;
    } catch (e) {
      status.textContent = `error: ${e.message ?? e}`;
    }
  }, 10);
}

function phantomArgs() {
  return [num("mu-shell"), num("mu-core"), num("core-r"), num("n-angles"), num("n-offsets")];
}

function runSinogram() {
  timed($("phantom-status"), () => {
    const args = phantomArgs();
    const g = phantom_sinogram(...args);
    // transpose so offsets run vertically and angles horizontally
    const [m, q] = [args[3], args[4]];
    const t = new Float64Array(m * q);
    for (let i = 0; i < m; i++) for (let j = 0; j < q; j++) t[j * m + i] = g[i * q + j];
    const [lo, hi] = gray($("sino"), t, m, q);
    return `sinogram ${m} x ${q}, range ${lo.toFixed(3)} to ${hi.toFixed(3)}`;
  });
}

function runReconstruction() {
  timed($("phantom-status"), () => {
    const n = 128;
    const img = phantom_reconstruction(...phantomArgs(), n);
    const [lo, hi] = gray($("image"), img, n, n);
    return `image ${n} x ${n}, range ${lo.toFixed(3)} to ${hi.toFixed(3)}`;
  });
}

function runTrace() {
  timed($("trace-status"), () => {
    const scan = boundary_trace(num("tr-mut"), num("tr-mus"), num("tr-gamma"), num("tr-dir"), 512);
    const phi = scan.angles(), f = scan.values();
    const exits = scan.predicted_exits(), jumps = scan.predicted_jumps();
    const canvas = $("trace"), ctx = canvas.getContext("2d");
    const w = canvas.width, h = canvas.height, pad = 24;
    const hi = Math.max(...f.filter(Number.isFinite), 1e-12);
    const x = (a) => pad + (w - 2 * pad) * a / (2 * Math.PI);
    const y = (v) => h - pad - (h - 2 * pad) * v / hi;
    ctx.clearRect(0, 0, w, h);
    ctx.strokeStyle = "#999";
    ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
    ctx.strokeStyle = "#c33";
    for (const e of exits) {
      ctx.beginPath(); ctx.moveTo(x(e), pad); ctx.lineTo(x(e), h - pad); ctx.stroke();
    }
    ctx.strokeStyle = "#036";
    ctx.beginPath();
    let pen = false;
    for (let i = 0; i < phi.length; i++) {
      if (!Number.isFinite(f[i])) { pen = false; continue; }
      pen ? ctx.lineTo(x(phi[i]), y(f[i])) : ctx.moveTo(x(phi[i]), y(f[i]));
      pen = true;
    }
    ctx.stroke();
    ctx.fillStyle = "#333";
    ctx.fillText("0", pad, h - 6);
    ctx.fillText("2π", w - pad - 12, h - 6);
    ctx.fillText(`max ${hi.toFixed(4)}`, pad + 4, pad - 6);
    const list = jumps.map((j) => j.toFixed(5)).join(", ") || "none";
    return `predicted jumps: ${list}`;
  });
}

await init();
$("run-sino").onclick = runSinogram;
$("run-fbp").onclick = runReconstruction;
$("run-trace").onclick = runTrace;
runSinogram();
