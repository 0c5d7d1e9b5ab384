import init, { Scene } from "./pkg/elastica_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const log = (text) => { $("log").textContent = text; };

let scene = null;
let lastTrace = "";

function paint(canvasId, rgba, size) {
  const canvas = $(canvasId);
  canvas.width = size;
  canvas.height = size;
  const image = new ImageData(new Uint8ClampedArray(rgba), size, size);
  canvas.getContext("2d").putImageData(image, 0, 0);
}

// Let the status text render before a blocking solver call.
const nextFrame = () => new Promise((resolve) => requestAnimationFrame(() => setTimeout(resolve)));

async function busy(message, work) {
  log(message);
  document.querySelectorAll("button").forEach((b) => { b.disabled = true; });
  await nextFrame();
  try {
    work();
  } catch (err) {
    log(`Error: ${err.message ?? err}`);
  } finally {
    $("generate").disabled = false;
    const ready = scene !== null;
    $("denoise").disabled = !ready;
    $("b0").disabled = !ready;
    $("download").disabled = lastTrace === "";
  }
}

$("generate").onclick = () => busy("Generating...", () => {
  scene?.free();
  scene = null;
  scene = new Scene(num("size"), num("variance"), num("seed"));
  paint("clean", scene.cleanRgba(), scene.size);
  paint("noisy", scene.noisyRgba(), scene.size);
  $("noisyCaption").textContent = `Noisy, PSNR ${scene.noisyPsnr().toFixed(2)} dB`;
  log(`Generated a ${scene.size}x${scene.size} rings image.`);
});

$("denoise").onclick = () => busy("Denoising...", () => {
  const solver = $("solver").value;
  const t0 = performance.now();
  const out = scene.denoise(
    solver, num("a"), num("b"), num("lambda"), num("r1"), num("tol"), num("maxIter"),
  );
  const seconds = ((performance.now() - t0) / 1000).toFixed(2);
  paint("result", out.rgba, scene.size);
  lastTrace = out.trace;
  $("resultCaption").textContent = `${solver}, PSNR ${out.psnr.toFixed(2)} dB`;
  log(`${solver}: ${out.iterations} iterations in ${seconds}s, PSNR ${out.psnr.toFixed(3)} dB, mean |n| ${out.normN.toFixed(4)}`);
  out.free();
});

$("b0").onclick = () => busy("Running the b = 0 check...", () => {
  log(scene.b0Check(num("b0Iter")));
});

$("download").onclick = () => {
  const url = URL.createObjectURL(new Blob([lastTrace], { type: "text/csv" }));
  const a = document.createElement("a");
  a.href = url;
  a.download = "trace.csv";
  a.click();
  URL.revokeObjectURL(url);
};

await init();
$("generate").disabled = false;
$("generate").click();
