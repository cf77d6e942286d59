import init, { scaleMap, detect, distanceMap } from "./pkg/groundscale_web.js";

const sliders = [
  { id: "height", label: "camera height (m)", min: 0.2, max: 1.5, step: 0.01, value: 0.6 },
  { id: "pitch", label: "pitch (deg)", min: -80, max: -5, step: 1, value: -40 },
  { id: "stride", label: "scale map stride (px)", min: 1, max: 64, step: 1, value: 16 },
  { id: "x", label: "obstacle x (m)", min: 0.5, max: 3.0, step: 0.01, value: 1.2 },
  { id: "y", label: "obstacle y (m)", min: -1.0, max: 1.0, step: 0.01, value: 0.1 },
  { id: "radius", label: "obstacle radius (m)", min: 0, max: 0.4, step: 0.01, value: 0.2 },
];

const controls = document.getElementById("controls");
for (const s of sliders) {
  const label = document.createElement("label");
  label.htmlFor = s.id;
  label.textContent = s.label;
  const input = Object.assign(document.createElement("input"), { type: "range", id: s.id, min: s.min, max: s.max, step: s.step, value: s.value });
  const out = Object.assign(document.createElement("output"), { id: `${s.id}-out`, value: s.value });
  controls.append(label, input, out);
}

const val = (id) => Number(document.getElementById(id).value);

function draw(name, produce) {
  const cap = document.getElementById(`${name}-cap`);
  try {
    const img = produce();
    const ctx = document.getElementById(name).getContext("2d");
    ctx.putImageData(new ImageData(new Uint8ClampedArray(img.rgba), img.width, img.height), 0, 0);
    cap.textContent = img.summary;
    cap.className = "";
    img.free();
  } catch (e) {
    cap.textContent = String(e.message ?? e);
    cap.className = "err";
  }
}

function update() {
  for (const s of sliders) document.getElementById(`${s.id}-out`).value = val(s.id);
  const [h, pitch] = [val("height"), val("pitch")];
  const obstacle = [val("x"), val("y"), val("radius")];
  draw("scale", () => scaleMap(h, pitch, val("stride")));
  draw("detect", () => detect(h, pitch, ...obstacle));
  draw("distance", () => distanceMap(h, pitch, ...obstacle));
}

await init();
controls.addEventListener("input", update);
update();
