import init, { Scene, simulateTrajectory } from "./pkg/panokit_web.js";

const VIEW_W = 480, VIEW_H = 320, PANO_H = 160;
const view = document.getElementById("view");
const pano = document.getElementById("pano");
const status = document.getElementById("status");
const seedInput = document.getElementById("seed");

const cam = { yaw: 0, pitch: 0, roll: 0, hfov: 90 };
let scene = null;
let playing = null;

const vfov = () => 2 * Math.atan(Math.tan(cam.hfov * Math.PI / 360) * VIEW_H / VIEW_W) * 180 / Math.PI;

function blit(canvas, bytes, w, h) {
  canvas.width = w;
  canvas.height = h;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(bytes), w, h), 0, 0);
}

function draw() {
  try {
    blit(view, scene.render(cam.yaw, cam.pitch, cam.roll, cam.hfov, vfov(), VIEW_W, VIEW_H), VIEW_W, VIEW_H);
    blit(pano, scene.footprint(cam.yaw, cam.pitch, cam.roll, cam.hfov, vfov()), scene.width(), scene.height());
    status.textContent =
      `yaw ${cam.yaw.toFixed(1)}  pitch ${cam.pitch.toFixed(1)}  roll ${cam.roll.toFixed(1)}  fov ${cam.hfov.toFixed(0)}x${vfov().toFixed(0)}`;
  } catch (e) {
    status.textContent = String(e);
  }
}

function regenerate() {
  scene = new Scene(PANO_H, BigInt(seedInput.value || 0));
  draw();
}

let drag = null;
view.addEventListener("pointerdown", (e) => {
  drag = { x: e.clientX, y: e.clientY, yaw: cam.yaw, pitch: cam.pitch };
  view.setPointerCapture(e.pointerId);
});
view.addEventListener("pointermove", (e) => {
  if (!drag) return;
  const degPerPx = cam.hfov / VIEW_W;
  cam.yaw = ((drag.yaw + (e.clientX - drag.x) * degPerPx + 540) % 360) - 180;
  cam.pitch = Math.max(-89, Math.min(89, drag.pitch + (e.clientY - drag.y) * degPerPx));
  draw();
});
view.addEventListener("pointerup", () => { drag = null; });
view.addEventListener("wheel", (e) => {
  e.preventDefault();
  cam.hfov = Math.max(30, Math.min(120, cam.hfov + Math.sign(e.deltaY) * 5));
  draw();
}, { passive: false });

document.getElementById("regen").addEventListener("click", regenerate);
document.getElementById("play").addEventListener("click", () => {
  if (playing) cancelAnimationFrame(playing);
  const frames = 120;
  const path = simulateTrajectory(BigInt(seedInput.value || 0), frames);
  const start = { ...cam };
  let k = 0;
  const step = () => {
    cam.yaw = start.yaw + path[3 * k];
    cam.pitch = start.pitch + path[3 * k + 1];
    cam.roll = path[3 * k + 2];
    draw();
    k += 1;
    playing = k < frames ? requestAnimationFrame(step) : null;
  };
  step();
});

await init();
regenerate();
