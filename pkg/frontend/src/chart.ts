/** Violation bar chart: one bar per decision point; clicking a bar selects
 * that decision for tree exploration. Bar heights are taken verbatim from
 * the report histogram — the chart computes nothing itself. */

export interface ChartOptions {
  width?: number;
  height?: number;
  onSelect?: (decisionIdx: number) => void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderChart(
  container: HTMLElement,
  histogram: number[],
  options: ChartOptions = {},
  selected: number | null = null,
): void {
  container.textContent = "";
  const width = options.width ?? 640;
  const height = options.height ?? 160;

  if (histogram.length === 0 || histogram.every((v) => v === 0)) {
    const empty = document.createElement("p");
    empty.className = "chart-empty";
    empty.textContent =
      histogram.length === 0
        ? "No decision points."
        : "No violations at any decision point.";
    container.appendChild(empty);
    if (histogram.length === 0) return;
  }

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "violation-chart");
  svg.setAttribute("role", "img");

  const maxCount = Math.max(1, ...histogram);
  const barGap = 4;
  const labelSpace = 18;
  const barWidth = Math.max(
    4,
    Math.floor((width - barGap * histogram.length) / histogram.length),
  );
  histogram.forEach((count, decision) => {
    const barHeight = Math.round(((height - labelSpace - 2) * count) / maxCount);
    const x = decision * (barWidth + barGap);
    const y = height - labelSpace - barHeight;

    const bar = document.createElementNS(SVG_NS, "rect");
    bar.setAttribute("x", String(x));
    bar.setAttribute("y", String(y));
    bar.setAttribute("width", String(barWidth));
    bar.setAttribute("height", String(Math.max(barHeight, count > 0 ? 2 : 0)));
    bar.setAttribute("data-decision", String(decision));
    bar.setAttribute("data-count", String(count));
    bar.setAttribute(
      "class",
      "chart-bar" +
        (decision === selected ? " selected" : "") +
        (count === 0 ? " zero" : ""),
    );
    bar.addEventListener("click", () => options.onSelect?.(decision));

    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `decision ${decision}: ${count} violation(s)`;
    bar.appendChild(title);
    svg.appendChild(bar);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(x + barWidth / 2));
    label.setAttribute("y", String(height - 4));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "chart-label");
    label.textContent = String(decision);
    svg.appendChild(label);

    // click target over the whole column, so zero bars stay selectable
    const hit = document.createElementNS(SVG_NS, "rect");
    hit.setAttribute("x", String(x));
    hit.setAttribute("y", "0");
    hit.setAttribute("width", String(barWidth));
    hit.setAttribute("height", String(height));
    hit.setAttribute("class", "chart-hit");
    hit.setAttribute("data-decision-hit", String(decision));
    hit.addEventListener("click", () => options.onSelect?.(decision));
    svg.appendChild(hit);
  });

  container.appendChild(svg);
}
