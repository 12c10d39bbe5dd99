// DOM/SVG rendering. Browser-only; all data arrives pre-shaped by the
// view-model builders so this layer stays free of score arithmetic.

import type {
  ClusterModel,
  MapModel,
  MapNode,
  SearchModel,
  SignpostModel,
} from "./model.js";
import type { TraceView } from "./trace.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapCallbacks {
  onSelectCluster(trc: string, peerId: string): void;
}

interface Positioned extends MapNode {
  x: number;
  y: number;
}

function layoutCircle(nodes: MapNode[], width: number, height: number): Positioned[] {
  const cx = width / 2;
  const cy = height / 2;
  if (nodes.length === 1) {
    return [{ ...nodes[0], x: cx, y: cy }];
  }
  const radius = Math.min(width, height) / 2 - 70;
  return nodes.map((node, i) => {
    const angle = (2 * Math.PI * i) / nodes.length - Math.PI / 2;
    return {
      ...node,
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    };
  });
}

export function renderMap(
  container: HTMLElement,
  model: MapModel,
  callbacks: MapCallbacks,
): void {
  container.replaceChildren();
  if (model.empty) {
    const note = document.createElement("p");
    note.className = "placeholder";
    note.textContent = "No clusters yet: ingest a corpus first.";
    container.appendChild(note);
    return;
  }
  const width = container.clientWidth || 640;
  const height = 420;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "map-svg");

  const positioned = layoutCircle(model.nodes, width, height);
  const byId = new Map(positioned.map((n) => [n.id, n]));

  for (const edge of model.edges) {
    const a = byId.get(edge.source);
    const b = byId.get(edge.target);
    if (!a || !b) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("class", "map-edge");
    svg.appendChild(line);
  }

  for (const node of positioned) {
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "map-node");
    group.setAttribute("transform", `translate(${node.x},${node.y})`);
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("r", String(node.radius));
    group.appendChild(circle);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("dy", String(node.radius + 16));
    label.textContent = `${node.trc} (${node.docCount})`;
    group.appendChild(label);
    group.addEventListener("click", () =>
      callbacks.onSelectCluster(node.trc, node.peerId),
    );
    svg.appendChild(group);
  }
  container.appendChild(svg);
}

export interface ClusterCallbacks {
  onSelectDoc(docId: string): void;
  onSelectCluster(trc: string, peerId: string): void;
}

function section(title: string): [HTMLElement, HTMLElement] {
  const wrapper = document.createElement("section");
  const heading = document.createElement("h3");
  heading.textContent = title;
  wrapper.appendChild(heading);
  return [wrapper, heading];
}

export function renderClusterPanel(
  container: HTMLElement,
  model: ClusterModel,
  callbacks: ClusterCallbacks,
): void {
  container.replaceChildren();
  const heading = document.createElement("h2");
  heading.textContent = `Cluster "${model.trc}" on ${model.peerId}`;
  container.appendChild(heading);

  const [docsSection] = section("Documents");
  const docList = document.createElement("ul");
  for (const doc of model.docs) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = doc.docId;
    button.addEventListener("click", () => callbacks.onSelectDoc(doc.docId));
    item.appendChild(button);
    const caption = document.createElement("span");
    const outlier = model.outlierDocs.includes(doc.docId) ? " [outlier]" : "";
    caption.textContent = ` ${doc.title} (owner ${doc.ownerPeer})${outlier}`;
    item.appendChild(caption);
    docList.appendChild(item);
  }
  docsSection.appendChild(docList);
  container.appendChild(docsSection);

  const [subSection] = section("Subclusters");
  const subList = document.createElement("ul");
  for (const sub of model.subclusters) {
    const item = document.createElement("li");
    const flag = sub.outlier ? " — outlier" : "";
    item.textContent = `${sub.id}: ${sub.docs.join(", ")} (density ${sub.density}${flag})`;
    subList.appendChild(item);
  }
  subSection.appendChild(subList);
  container.appendChild(subSection);

  const [relatedSection] = section("Related clusters");
  const relatedList = document.createElement("ul");
  for (const ref of model.related) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = `${ref.trc} @ ${ref.peerId}`;
    button.addEventListener("click", () =>
      callbacks.onSelectCluster(ref.trc, ref.peerId),
    );
    item.appendChild(button);
    relatedList.appendChild(item);
  }
  relatedSection.appendChild(relatedList);
  container.appendChild(relatedSection);
}

export interface SignpostCallbacks {
  onFollow(toDoc: string): void;
  onTrace(docId: string): void;
}

export function renderSignpostPanel(
  container: HTMLElement,
  model: SignpostModel,
  callbacks: SignpostCallbacks,
): void {
  container.replaceChildren();
  const heading = document.createElement("h2");
  heading.textContent = `Document ${model.docId}`;
  container.appendChild(heading);

  if (model.emptyNote) {
    const note = document.createElement("p");
    note.className = "placeholder";
    note.textContent = model.emptyNote;
    container.appendChild(note);
  }

  const columns = document.createElement("div");
  columns.className = "signpost-columns";
  for (const [title, terms] of [
    ["Keywords", model.keywords],
    ["Source topics", model.sourceTopics],
  ] as const) {
    const [block] = section(title);
    const list = document.createElement("ol");
    for (const entry of terms) {
      const item = document.createElement("li");
      item.textContent = `${entry.term} ${entry.score}`;
      list.appendChild(item);
    }
    block.appendChild(list);
    columns.appendChild(block);
  }
  container.appendChild(columns);

  const [followSection] = section("Follow source topics");
  const followList = document.createElement("ul");
  for (const action of model.followActions) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.className = "follow-action";
    button.textContent = `follow → ${action.toDoc} (overlap ${action.overlap})`;
    button.addEventListener("click", () => callbacks.onFollow(action.toDoc));
    item.appendChild(button);
    followList.appendChild(item);
  }
  followSection.appendChild(followList);
  container.appendChild(followSection);

  const traceButton = document.createElement("button");
  traceButton.textContent = "trace this topic";
  traceButton.addEventListener("click", () => callbacks.onTrace(model.docId));
  container.appendChild(traceButton);
}

export interface TraceCallbacks {
  onBranch(docId: string): void;
  onDeepen(): void;
  onOpenDoc(docId: string): void;
}

export function renderTracePanel(
  container: HTMLElement,
  view: TraceView,
  callbacks: TraceCallbacks,
): void {
  container.replaceChildren();
  const heading = document.createElement("h2");
  heading.textContent = `Trace from ${view.rootDoc} (depth ${view.depth})`;
  container.appendChild(heading);

  const list = document.createElement("ol");
  list.className = "trace-chain";
  for (const step of view.steps) {
    const item = document.createElement("li");
    if (step.overlapFromPrev !== null) {
      const overlap = document.createElement("span");
      overlap.className = "hop-overlap";
      overlap.textContent = `—${step.overlapFromPrev}→ `;
      item.appendChild(overlap);
    }
    const open = document.createElement("button");
    open.textContent = step.docId;
    open.addEventListener("click", () => callbacks.onOpenDoc(step.docId));
    item.appendChild(open);
    const branch = document.createElement("button");
    branch.className = "branch-action";
    branch.textContent = "branch here";
    branch.addEventListener("click", () => callbacks.onBranch(step.docId));
    item.appendChild(branch);
    list.appendChild(item);
  }
  container.appendChild(list);

  const deepen = document.createElement("button");
  deepen.textContent = "increase depth";
  deepen.addEventListener("click", () => callbacks.onDeepen());
  container.appendChild(deepen);
}

export function renderSearchResults(
  container: HTMLElement,
  model: SearchModel,
  callbacks: ClusterCallbacks,
): void {
  container.replaceChildren();
  const heading = document.createElement("h2");
  heading.textContent = `Query cluster: ${model.trc} @ ${model.peerId}`;
  container.appendChild(heading);
  const list = document.createElement("ol");
  for (const result of model.results) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = `${result.docId} (${result.score})`;
    button.addEventListener("click", () => callbacks.onSelectDoc(result.docId));
    item.appendChild(button);
    const caption = document.createElement("span");
    caption.textContent = ` ${result.title}`;
    item.appendChild(caption);
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderErrorBanner(
  container: HTMLElement,
  message: string,
  onRetry: () => void,
): void {
  container.replaceChildren();
  const banner = document.createElement("div");
  banner.className = "error-banner";
  const text = document.createElement("span");
  text.textContent = message;
  banner.appendChild(text);
  const retry = document.createElement("button");
  retry.textContent = "retry";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  container.appendChild(banner);
}
