import type { DocumentPayload, DocumentSummary, MentionPayload } from "./api.js";
import type { TaxonomyIndex } from "./taxonomy.js";
import type { SaveState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

interface Segment {
  start: number;
  end: number;
  covering: MentionPayload[];
}

// Cut one sentence at every mention boundary. Each segment has a constant
// covering set, so arbitrary overlap and nesting render without special
// cases: deeper cover = darker shade, borders mark starts and ends.
function segmentSentence(
  sentenceIndex: number,
  tokenCount: number,
  mentions: MentionPayload[],
): Segment[] {
  const here = mentions.filter((m) => m.sentence === sentenceIndex);
  const cuts = new Set<number>([0, tokenCount]);
  for (const m of here) {
    cuts.add(m.start);
    cuts.add(m.end);
  }
  const bounds = [...cuts].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < bounds.length; i++) {
    const [start, end] = [bounds[i], bounds[i + 1]];
    segments.push({
      start,
      end,
      covering: here.filter((m) => m.start <= start && end <= m.end),
    });
  }
  return segments;
}

export function documentView(doc: DocumentPayload, activeMention: string | null): string {
  const parts: string[] = [];
  doc.sentences.forEach((sentence, sentenceIndex) => {
    parts.push('<p class="sentence">');
    for (const seg of segmentSentence(sentenceIndex, sentence.length, doc.mentions)) {
      const text = sentence
        .slice(seg.start, seg.end)
        .map((t) => escapeHtml(t.text))
        .join(" ");
      if (seg.covering.length === 0) {
        parts.push(`<span class="seg">${text}</span>`);
        continue;
      }
      const classes = ["seg", "covered", `cov-${Math.min(seg.covering.length, 4)}`];
      if (seg.covering.some((m) => m.start === seg.start)) classes.push("m-open");
      if (seg.covering.some((m) => m.end === seg.end)) classes.push("m-close");
      if (activeMention !== null && seg.covering.some((m) => m.id === activeMention)) {
        classes.push("active");
      }
      // innermost covering mention wins the click
      const innermost = seg.covering.reduce((a, b) =>
        b.end - b.start < a.end - a.start ? b : a,
      );
      parts.push(
        `<span class="${classes.join(" ")}" data-mention="${escapeHtml(innermost.id)}">` +
          text +
          "</span>",
      );
    }
    parts.push("</p>");
  });
  if (doc.mentions.length === 0) {
    parts.push('<p class="note">No mentions in this document; nothing to annotate.</p>');
  }
  return parts.join("");
}

export function documentListView(documents: DocumentSummary[]): string {
  const rows = documents.map(
    (d) =>
      `<tr><td><a href="#/doc/${encodeURIComponent(d.id)}">${escapeHtml(d.id)}</a></td>` +
      `<td>${escapeHtml(d.split)}</td><td>${d.mentions}</td></tr>`,
  );
  return (
    '<table class="doc-list"><thead><tr><th>document</th><th>split</th>' +
    `<th>mentions</th></tr></thead><tbody>${rows.join("")}</tbody></table>`
  );
}

function treeNodes(
  tax: TaxonomyIndex,
  parent: string | null,
  selected: ReadonlySet<string>,
  collapsed: ReadonlySet<string>,
): string {
  const children = tax.childrenOf(parent);
  if (children.length === 0) return "";
  const items = children.map((name) => {
    const leafName = name.split("/").pop() as string;
    const hasKids = tax.childrenOf(name).length > 0;
    const isCollapsed = collapsed.has(name);
    const toggle = hasKids
      ? `<button class="toggle" data-toggle="${escapeHtml(name)}">${isCollapsed ? "+" : "-"}</button>`
      : '<span class="toggle-pad"></span>';
    const checked = selected.has(name) ? " checked" : "";
    const row =
      `${toggle}<label><input type="checkbox" data-label="${escapeHtml(name)}"${checked}>` +
      ` ${escapeHtml(leafName)}</label>`;
    const sub = isCollapsed ? "" : treeNodes(tax, name, selected, collapsed);
    return `<li>${row}${sub}</li>`;
  });
  return `<ul class="tree">${items.join("")}</ul>`;
}

export function pickerView(
  tax: TaxonomyIndex,
  selected: ReadonlySet<string>,
  collapsed: ReadonlySet<string>,
): string {
  const chips = [...selected].sort().map(
    (name) =>
      `<span class="chip">${escapeHtml(name)}` +
      `<button class="backoff" data-backoff="${escapeHtml(name)}" title="back off to parent">x</button></span>`,
  );
  return (
    `<div class="chips">${chips.join("") || '<span class="note">no labels selected</span>'}</div>` +
    treeNodes(tax, null, selected, collapsed)
  );
}

const STATE_TEXT: Record<SaveState, string> = {
  clean: "saved",
  dirty: "unsaved changes",
  saving: "saving...",
  queued: "offline, queued",
};

export function statusView(
  mentionId: string | null,
  state: SaveState | null,
  queued: number,
): string {
  const parts: string[] = [];
  if (mentionId !== null && state !== null) {
    parts.push(`<span class="mention-id">${escapeHtml(mentionId)}</span>`);
    parts.push(`<span class="state state-${state}">${STATE_TEXT[state]}</span>`);
  }
  if (queued > 0) {
    parts.push(`<span class="state state-queued">${queued} save(s) waiting for the server</span>`);
  }
  return parts.join(" ");
}

export function errorBanner(message: string): string {
  return (
    `<div class="banner">${escapeHtml(message)} ` +
    '<button data-retry="1">retry</button></div>'
  );
}
