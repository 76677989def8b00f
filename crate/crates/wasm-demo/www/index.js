import init, { enhancement_curve, effective_dynamics, occupation_map } from "./pkg/cqed_squeeze_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

function line(ctx, xs, ys, sx, sy, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  let pen = false;
  xs.forEach((x, i) => {
    if (!Number.isFinite(ys[i])) { pen = false; return; }
    pen ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]));
    pen = true;
  });
  ctx.stroke();
  ctx.lineWidth = 1;
}

function drawCurve() {
  const c = $("curve"), ctx = c.getContext("2d"), pad = 36;
  const rmax = num("rpmax"), n = 200;
  const ys = Array.from(enhancement_curve($("fam").value, rmax, n)).map((y) => Math.log10(y));
  const xs = ys.map((_, i) => (rmax * i) / (n - 1));
  const fin = ys.filter(Number.isFinite);
  const lo = Math.min(-0.5, ...fin), hi = Math.max(0.5, ...fin);
  const sx = (x) => pad + ((c.width - 2 * pad) * x) / rmax;
  const sy = (y) => c.height - pad - ((c.height - 2 * pad) * (y - lo)) / (hi - lo);
  axes(ctx, c.width, c.height, pad);
  ctx.setLineDash([4, 4]);
  line(ctx, [0, rmax], [0, 0], sx, sy, "#aaa");
  ctx.setLineDash([]);
  line(ctx, xs, ys, sx, sy, "#333");
  ctx.fillStyle = "#555";
  ctx.fillText("r_p", c.width - pad, c.height - 10);
  ctx.fillText(`10^${hi.toFixed(1)}`, 2, pad);
  ctx.fillText(`10^${lo.toFixed(1)}`, 2, c.height - pad);
}

function drawDynamics() {
  const c = $("dyn"), ctx = c.getContext("2d"), pad = 36;
  const t0 = performance.now();
  const v = effective_dynamics(num("rp"), num("k1"), num("per"), 400);
  const ms = performance.now() - t0;
  const t = [], pe = [], nc = [];
  for (let i = 0; i < v.length; i += 3) { t.push(v[i]); pe.push(v[i + 1]); nc.push(v[i + 2]); }
  const tmax = t[t.length - 1];
  const sx = (x) => pad + ((c.width - 2 * pad) * x) / tmax;
  const sy = (y) => c.height - pad - (c.height - 2 * pad) * y;
  axes(ctx, c.width, c.height, pad);
  line(ctx, t, pe, sx, sy, "#c33");
  line(ctx, t, nc, sx, sy, "#36c");
  ctx.fillStyle = "#555";
  ctx.fillText("1", pad - 12, sy(1) + 4);
  ctx.fillText(`t = ${tmax.toPrecision(4)} / g`, c.width - pad - 80, c.height - 10);
  $("dyninfo").textContent = `${t.length} samples in ${ms.toFixed(0)} ms.`;
}

function drawMap() {
  const c = $("map"), ctx = c.getContext("2d"), n = 120;
  const v = occupation_map(num("mrp"), num("mth"), 3.0, n);
  const img = ctx.createImageData(n, n);
  let top = 0;
  const z = Array.from(v, (x) => Math.log10(1 + Math.max(x, 0)));
  z.forEach((x) => { top = Math.max(top, x); });
  z.forEach((x, k) => {
    const s = top > 0 ? x / top : 0;
    img.data[4 * k] = 255 * Math.min(1, 2 * s);
    img.data[4 * k + 1] = 255 * Math.max(0, 2 * s - 1);
    img.data[4 * k + 2] = 80 * (1 - s);
    img.data[4 * k + 3] = 255;
  });
  const tmp = document.createElement("canvas");
  tmp.width = tmp.height = n;
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, c.width, c.height);
  $("mapinfo").textContent = `max N_s = ${(Math.pow(10, top) - 1).toPrecision(3)}.`;
}

function guard(f) {
  return () => {
    try { f(); $("err").textContent = ""; } catch (e) { $("err").textContent = String(e); }
  };
}

await init();
const curve = guard(drawCurve), dyn = guard(drawDynamics), map = guard(drawMap);
$("fam").onchange = curve;
$("rpmax").onchange = curve;
$("run").onclick = dyn;
$("mrp").oninput = map;
$("mth").oninput = map;
curve();
dyn();
map();
