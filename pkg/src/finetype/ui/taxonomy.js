/**
 * Label tree index. Labels are slash paths (person/artist/actor); the set
 * served by the backend is closed under parents, and every selection shown
 * to the user must stay closed too, so closure lives here.
 */
export class TaxonomyIndex {
    constructor(labels) {
        this.parents = new Map();
        this.kids = new Map();
        this.names = labels.map((l) => l.name).sort();
        for (const label of labels) {
            this.parents.set(label.name, label.parent);
        }
        for (const name of this.names) {
            const parent = this.parents.get(name) ?? null;
            const siblings = this.kids.get(parent);
            if (siblings)
                siblings.push(name);
            else
                this.kids.set(parent, [name]);
        }
    }
    has(name) {
        return this.parents.has(name);
    }
    parentOf(name) {
        const parent = this.parents.get(name);
        if (parent === undefined)
            throw new Error(`unknown label: ${name}`);
        return parent;
    }
    /** Children in sorted order; pass null for the depth-1 roots. */
    childrenOf(name) {
        if (name !== null && !this.parents.has(name)) {
            throw new Error(`unknown label: ${name}`);
        }
        return this.kids.get(name) ?? [];
    }
    depthOf(name) {
        if (!this.parents.has(name))
            throw new Error(`unknown label: ${name}`);
        return name.split("/").length;
    }
    /** Proper ancestors, root first. */
    ancestorsOf(name) {
        const chain = [];
        let parent = this.parentOf(name);
        while (parent !== null) {
            chain.unshift(parent);
            parent = this.parentOf(parent);
        }
        return chain;
    }
    closure(names) {
        const out = new Set();
        for (const name of names) {
            for (const ancestor of this.ancestorsOf(name))
                out.add(ancestor);
            out.add(name);
        }
        return out;
    }
    descendantsOf(name) {
        const out = [];
        const stack = [...this.childrenOf(name)];
        while (stack.length > 0) {
            const next = stack.pop();
            out.push(next);
            stack.push(...this.childrenOf(next));
        }
        return out.sort();
    }
}
