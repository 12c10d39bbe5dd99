// Page wiring: map on the left, detail panels on the right.

import { ApiClient, ApiError } from "./api.js";
import {
  buildClusterModel,
  buildMapModel,
  buildSearchModel,
  buildSignpostModel,
} from "./model.js";
import {
  renderClusterPanel,
  renderErrorBanner,
  renderMap,
  renderSearchResults,
  renderSignpostPanel,
  renderTracePanel,
} from "./render.js";
import { TraceController } from "./trace.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("api") ?? "");
const traces = new TraceController(api);

const mapContainer = byId("map");
const detailContainer = byId("detail");
const traceContainer = byId("trace");
const bannerContainer = byId("banner");

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function showError(err: unknown, retry: () => void): void {
  const message =
    err instanceof ApiError
      ? err.suggestion
        ? `${err.message} (nearest cluster: ${err.suggestion})`
        : err.message
      : `API unreachable: ${String(err)}`;
  renderErrorBanner(bannerContainer, message, retry);
}

function clearError(): void {
  bannerContainer.replaceChildren();
}

async function loadMap(): Promise<void> {
  try {
    const payload = await api.map();
    clearError();
    renderMap(mapContainer, buildMapModel(payload), {
      onSelectCluster: (trc, peer) => void openCluster(trc, peer),
    });
  } catch (err) {
    showError(err, () => void loadMap());
  }
}

async function openCluster(trc: string, peer: string): Promise<void> {
  try {
    const payload = await api.cluster(trc, peer);
    clearError();
    renderClusterPanel(detailContainer, buildClusterModel(payload), {
      onSelectDoc: (docId) => void openDoc(docId),
      onSelectCluster: (t, p) => void openCluster(t, p),
    });
  } catch (err) {
    showError(err, () => void openCluster(trc, peer));
  }
}

async function openDoc(docId: string): Promise<void> {
  try {
    const payload = await api.signpost(docId);
    clearError();
    renderSignpostPanel(detailContainer, buildSignpostModel(payload), {
      onFollow: (toDoc) => void openDoc(toDoc),
      onTrace: (id) => void startTrace(id),
    });
  } catch (err) {
    showError(err, () => void openDoc(docId));
  }
}

function renderTrace(): void {
  const view = traces.current();
  if (!view) return;
  renderTracePanel(traceContainer, view, {
    onBranch: (docId) => {
      void traces.branchAt(docId).then(renderTrace);
    },
    onDeepen: () => {
      void traces.deepen(5).then(renderTrace);
    },
    onOpenDoc: (docId) => void openDoc(docId),
  });
}

async function startTrace(docId: string): Promise<void> {
  try {
    await traces.start(docId, 5);
    clearError();
    renderTrace();
  } catch (err) {
    showError(err, () => void startTrace(docId));
  }
}

const searchForm = byId("search-form") as HTMLFormElement;
const searchInput = byId("search-input") as HTMLInputElement;
searchForm.addEventListener("submit", (event) => {
  event.preventDefault();
  const query = searchInput.value.trim();
  if (!query) return;
  void (async () => {
    try {
      const payload = await api.search(query);
      clearError();
      renderSearchResults(detailContainer, buildSearchModel(payload), {
        onSelectDoc: (docId) => void openDoc(docId),
        onSelectCluster: (t, p) => void openCluster(t, p),
      });
    } catch (err) {
      showError(err, () => searchForm.requestSubmit());
    }
  })();
});

void loadMap();
