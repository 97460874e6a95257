import type { DocumentPayload, LabelInfo, MentionPayload } from "../src/api.js";

/** Expand leaf paths into the closed LabelInfo list the backend would send. */
export function labelInfos(paths: string[]): LabelInfo[] {
  const names = new Set<string>();
  for (const path of paths) {
    const parts = path.split("/");
    for (let k = 1; k <= parts.length; k++) names.add(parts.slice(0, k).join("/"));
  }
  return [...names].sort().map((name) => {
    const parts = name.split("/");
    return {
      name,
      depth: parts.length,
      parent: parts.length > 1 ? parts.slice(0, -1).join("/") : null,
    };
  });
}

export function doc(
  id: string,
  words: string[],
  mentions: Partial<MentionPayload>[],
): DocumentPayload {
  return {
    id,
    split: "train",
    sentences: [words.map((text) => ({ text, dep_head: -1, dep_label: "dep" }))],
    mentions: mentions.map((m, i) => ({
      id: m.id ?? `m${i}`,
      sentence: m.sentence ?? 0,
      start: m.start ?? 0,
      end: m.end ?? 1,
      head: m.head ?? m.start ?? 0,
      kind: m.kind ?? "named",
    })),
  };
}
