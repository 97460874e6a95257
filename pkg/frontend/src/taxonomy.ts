import type { LabelInfo } from "./api.js";

/**
 * Label tree index. Labels are slash paths (person/artist/actor); the set
 * served by the backend is closed under parents, and every selection shown
 * to the user must stay closed too, so closure lives here.
 */
export class TaxonomyIndex {
  readonly names: string[];
  private readonly parents = new Map<string, string | null>();
  private readonly kids = new Map<string | null, string[]>();

  constructor(labels: LabelInfo[]) {
    this.names = labels.map((l) => l.name).sort();
    for (const label of labels) {
      this.parents.set(label.name, label.parent);
    }
    for (const name of this.names) {
      const parent = this.parents.get(name) ?? null;
      const siblings = this.kids.get(parent);
      if (siblings) siblings.push(name);
      else this.kids.set(parent, [name]);
    }
  }

  has(name: string): boolean {
    return this.parents.has(name);
  }

  parentOf(name: string): string | null {
    const parent = this.parents.get(name);
    if (parent === undefined) throw new Error(`unknown label: ${name}`);
    return parent;
  }

  /** Children in sorted order; pass null for the depth-1 roots. */
  childrenOf(name: string | null): string[] {
    if (name !== null && !this.parents.has(name)) {
      throw new Error(`unknown label: ${name}`);
    }
    return this.kids.get(name) ?? [];
  }

  depthOf(name: string): number {
    if (!this.parents.has(name)) throw new Error(`unknown label: ${name}`);
    return name.split("/").length;
  }

  /** Proper ancestors, root first. */
  ancestorsOf(name: string): string[] {
    const chain: string[] = [];
    let parent = this.parentOf(name);
    while (parent !== null) {
      chain.unshift(parent);
      parent = this.parentOf(parent);
    }
    return chain;
  }

  closure(names: Iterable<string>): Set<string> {
    const out = new Set<string>();
    for (const name of names) {
      for (const ancestor of this.ancestorsOf(name)) out.add(ancestor);
      out.add(name);
    }
    return out;
  }

  descendantsOf(name: string): string[] {
    const out: string[] = [];
    const stack = [...this.childrenOf(name)];
    while (stack.length > 0) {
      const next = stack.pop() as string;
      out.push(next);
      stack.push(...this.childrenOf(next));
    }
    return out.sort();
  }
}
