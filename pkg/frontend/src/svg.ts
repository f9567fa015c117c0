/** SVG line-chart assembly with no DOM dependency. */

import { Scale, linear, paddedExtent, ticks } from "./scale";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dashed?: boolean;
  marker?: boolean;
  legend?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  xRange?: [number, number];
  yRange?: [number, number];
  width?: number;
  height?: number;
}

const MARGIN = { top: 34, right: 16, bottom: 46, left: 58 };

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function el(name: string, attrs: Record<string, string | number>, body = ""): string {
  const a = Object.entries(attrs)
    .map(([k, v]) => `${k}="${v}"`)
    .join(" ");
  return body ? `<${name} ${a}>${body}</${name}>` : `<${name} ${a}/>`;
}

function fmtTick(v: number): string {
  if (Math.abs(v) >= 10000) return v.toExponential(0).replace("+", "");
  return Number(v.toPrecision(6)).toString();
}

function polyline(s: Series, xs: Scale, ys: Scale): string {
  const pts = s.x.map((xv, i) => `${xs.map(xv).toFixed(2)},${ys.map(s.y[i]).toFixed(2)}`);
  const attrs: Record<string, string | number> = {
    points: pts.join(" "),
    fill: "none",
    stroke: s.color,
    "stroke-width": 1.6,
  };
  if (s.dashed) attrs["stroke-dasharray"] = "6,4";
  let out = el("polyline", attrs);
  if (s.marker) {
    for (let i = 0; i < s.x.length; i++) {
      out += el("circle", {
        cx: xs.map(s.x[i]).toFixed(2),
        cy: ys.map(s.y[i]).toFixed(2),
        r: 2.4,
        fill: s.color,
      });
    }
  }
  return out;
}

export function renderChart(spec: ChartSpec): string {
  const width = spec.width ?? 560;
  const height = spec.height ?? 420;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const allX = spec.series.flatMap((s) => s.x);
  const allY = spec.series.flatMap((s) => s.y);
  const xDom = spec.xRange ?? paddedExtent(allX);
  const yDom = spec.yRange ?? paddedExtent(allY);
  const xs = linear(xDom, [MARGIN.left, MARGIN.left + plotW]);
  const ys = linear(yDom, [MARGIN.top + plotH, MARGIN.top]);

  const parts: string[] = [];
  parts.push(el("rect", { x: 0, y: 0, width, height, fill: "white" }));
  parts.push(
    el("rect", {
      x: MARGIN.left,
      y: MARGIN.top,
      width: plotW,
      height: plotH,
      fill: "none",
      stroke: "#333",
      "stroke-width": 1,
    })
  );

  for (const tx of ticks(xDom[0], xDom[1])) {
    const px = xs.map(tx);
    parts.push(el("line", { x1: px, y1: MARGIN.top, x2: px, y2: MARGIN.top + plotH, stroke: "#ddd" }));
    parts.push(
      el(
        "text",
        { x: px, y: MARGIN.top + plotH + 16, "text-anchor": "middle", "font-size": 11 },
        esc(fmtTick(tx))
      )
    );
  }
  for (const ty of ticks(yDom[0], yDom[1])) {
    const py = ys.map(ty);
    parts.push(el("line", { x1: MARGIN.left, y1: py, x2: MARGIN.left + plotW, y2: py, stroke: "#ddd" }));
    parts.push(
      el(
        "text",
        { x: MARGIN.left - 6, y: py + 4, "text-anchor": "end", "font-size": 11 },
        esc(fmtTick(ty))
      )
    );
  }

  for (const s of spec.series) {
    parts.push(polyline(s, xs, ys));
  }

  parts.push(
    el(
      "text",
      { x: MARGIN.left + plotW / 2, y: height - 10, "text-anchor": "middle", "font-size": 13 },
      esc(spec.xLabel)
    )
  );
  parts.push(
    el(
      "text",
      {
        x: 16,
        y: MARGIN.top + plotH / 2,
        "text-anchor": "middle",
        "font-size": 13,
        transform: `rotate(-90 16 ${MARGIN.top + plotH / 2})`,
      },
      esc(spec.yLabel)
    )
  );
  parts.push(
    el(
      "text",
      { x: MARGIN.left + plotW / 2, y: 18, "text-anchor": "middle", "font-size": 14, "font-weight": "bold" },
      esc(spec.title)
    )
  );

  // legend, one row per labeled series
  const legend = spec.series.filter((s) => s.legend !== false);
  legend.forEach((s, i) => {
    const lx = MARGIN.left + 12;
    const ly = MARGIN.top + 14 + i * 16;
    const line: Record<string, string | number> = {
      x1: lx,
      y1: ly - 4,
      x2: lx + 24,
      y2: ly - 4,
      stroke: s.color,
      "stroke-width": 2,
    };
    if (s.dashed) line["stroke-dasharray"] = "6,4";
    parts.push(el("line", line));
    parts.push(el("text", { x: lx + 30, y: ly, "font-size": 11 }, esc(s.label)));
  });

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">` +
    parts.join("") +
    "</svg>"
  );
}
