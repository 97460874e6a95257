import { Api } from "./api.js";
import type { DocumentSummary } from "./api.js";
import { TaxonomyIndex } from "./taxonomy.js";
import { AnnotationSession } from "./state.js";
import {
  documentListView,
  documentView,
  errorBanner,
  pickerView,
  statusView,
} from "./view.js";

const api = new Api();
const FLUSH_INTERVAL_MS = 3000;

let tax: TaxonomyIndex | null = null;
let summaries: DocumentSummary[] = [];
let session: AnnotationSession | null = null;
const collapsed = new Set<string>();

const main = document.getElementById("main") as HTMLElement;
const picker = document.getElementById("picker") as HTMLElement;
const status = document.getElementById("status") as HTMLElement;
const banner = document.getElementById("banner") as HTMLElement;
const annotatorInput = document.getElementById("annotator") as HTMLInputElement;

annotatorInput.value = localStorage.getItem("annotator") ?? "";
annotatorInput.addEventListener("change", () => {
  localStorage.setItem("annotator", annotatorInput.value.trim());
  route();
});

function annotator(): string {
  return annotatorInput.value.trim();
}

function renderSession(): void {
  if (session === null || tax === null) return;
  const current = session.currentMention;
  main.innerHTML = documentView(session.doc, current);
  if (current !== null) {
    picker.innerHTML = pickerView(tax, session.selection(current), collapsed);
    status.innerHTML = statusView(current, session.state(current), session.queuedCount);
  } else {
    picker.innerHTML = "";
    status.innerHTML = "";
  }
}

function showError(message: string): void {
  banner.innerHTML = errorBanner(message);
}

async function openDocument(id: string): Promise<void> {
  banner.innerHTML = "";
  if (annotator() === "") {
    main.innerHTML = '<p class="note">Set your annotator id first.</p>';
    return;
  }
  try {
    const [taxonomyPayload, doc] = await Promise.all([
      tax === null ? api.taxonomy() : Promise.resolve(null),
      api.document(id),
    ]);
    if (taxonomyPayload !== null) tax = new TaxonomyIndex(taxonomyPayload.labels);
    session = new AnnotationSession(tax as TaxonomyIndex, doc, annotator(), api);
    // pull back what this annotator already saved in earlier sessions
    const [progress, consensus] = await Promise.all([
      api.progress(annotator()),
      api.consensus(id, 1),
    ]);
    session.restore(progress.documents[id] ?? [], consensus.mentions);
  } catch (failure) {
    showError(`Could not load ${id}: ${String(failure)}`);
    return;
  }
  renderSession();
}

async function openListing(): Promise<void> {
  banner.innerHTML = "";
  session = null;
  picker.innerHTML = "";
  status.innerHTML = "";
  try {
    const listing = await api.documents();
    summaries = listing.documents;
  } catch (failure) {
    showError(`Could not load the document list: ${String(failure)}`);
    return;
  }
  main.innerHTML = documentListView(summaries);
}

function route(): void {
  const match = /^#\/doc\/(.+)$/.exec(location.hash);
  if (match) void openDocument(decodeURIComponent(match[1]));
  else void openListing();
}

async function saveCurrent(): Promise<void> {
  if (session === null) return;
  const current = session.currentMention;
  if (current === null) return;
  renderSession();
  const result = await session.save(current);
  if (result === "rejected") showError("The server rejected that annotation.");
  renderSession();
}

main.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest("[data-mention]");
  if (target && session !== null) {
    session.moveTo(target.getAttribute("data-mention") as string);
    renderSession();
  }
});

picker.addEventListener("click", (event) => {
  const element = event.target as HTMLElement;
  if (session === null) return;
  const current = session.currentMention;
  if (current === null) return;
  const toggle = element.closest("[data-toggle]");
  if (toggle) {
    const name = toggle.getAttribute("data-toggle") as string;
    if (collapsed.has(name)) collapsed.delete(name);
    else collapsed.add(name);
    renderSession();
    return;
  }
  const backoff = element.closest("[data-backoff]");
  if (backoff) {
    session.removeLabel(current, backoff.getAttribute("data-backoff") as string);
    renderSession();
  }
});

picker.addEventListener("change", (event) => {
  const box = event.target as HTMLInputElement;
  const label = box.getAttribute("data-label");
  if (label === null || session === null) return;
  const current = session.currentMention;
  if (current === null) return;
  if (box.checked) session.selectLabel(current, label);
  else session.removeLabel(current, label);
  renderSession();
});

banner.addEventListener("click", (event) => {
  if ((event.target as HTMLElement).closest("[data-retry]")) route();
});

document.addEventListener("keydown", (event) => {
  if (session === null) return;
  if (event.target instanceof HTMLInputElement && event.target.type === "text") return;
  if (event.key === "n" || event.key === "ArrowRight") {
    session.next();
    renderSession();
  } else if (event.key === "p" || event.key === "ArrowLeft") {
    session.prev();
    renderSession();
  } else if (event.key === "s") {
    event.preventDefault();
    void saveCurrent();
  }
});

const saveButton = document.getElementById("save") as HTMLButtonElement;
saveButton.addEventListener("click", () => void saveCurrent());

window.addEventListener("hashchange", route);

setInterval(() => {
  if (session !== null && session.queuedCount > 0) {
    void session.flushQueue().then(() => renderSession());
  }
}, FLUSH_INTERVAL_MS);

route();
