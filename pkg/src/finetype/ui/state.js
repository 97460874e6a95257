import { ApiError } from "./api.js";
/**
 * Per-document annotation session.
 *
 * Holds the mention cursor and one label selection per mention. Selections
 * are kept ancestor-closed by construction. A mention is "dirty" while its
 * selection differs from the last server-acknowledged (or restored) state;
 * nothing is reported clean before the POST resolves.
 *
 * Failure handling splits two ways: a server rejection rolls the selection
 * back to the acknowledged state (the server said no, retrying is useless),
 * while a network failure keeps the selection and queues the save for a
 * later flushQueue call.
 */
export class AnnotationSession {
    constructor(tax, doc, annotator, api) {
        this.tax = tax;
        this.doc = doc;
        this.annotator = annotator;
        this.api = api;
        this.selected = new Map();
        this.acked = new Map();
        this.states = new Map();
        this.queue = new Map();
        this.cursor = doc.mentions.length > 0 ? 0 : -1;
        for (const mention of doc.mentions) {
            this.selected.set(mention.id, new Set());
            this.acked.set(mention.id, new Set());
            this.states.set(mention.id, "clean");
        }
    }
    get currentMention() {
        return this.cursor >= 0 ? this.doc.mentions[this.cursor].id : null;
    }
    next() {
        const n = this.doc.mentions.length;
        if (n > 0)
            this.cursor = (this.cursor + 1) % n;
    }
    prev() {
        const n = this.doc.mentions.length;
        if (n > 0)
            this.cursor = (this.cursor - 1 + n) % n;
    }
    moveTo(mentionId) {
        const index = this.doc.mentions.findIndex((m) => m.id === mentionId);
        if (index >= 0)
            this.cursor = index;
    }
    selection(mentionId) {
        return this.lookup(this.selected, mentionId);
    }
    /** Add a label and its ancestors. */
    selectLabel(mentionId, label) {
        if (!this.tax.has(label))
            throw new Error(`unknown label: ${label}`);
        const current = this.lookup(this.selected, mentionId);
        current.add(label);
        for (const ancestor of this.tax.ancestorsOf(label))
            current.add(ancestor);
        this.markDirty(mentionId);
    }
    /**
     * Remove a label and any selected descendants. Removing a leaf of the
     * selection is the one-click back-off: the parent chain stays selected.
     */
    removeLabel(mentionId, label) {
        const current = this.lookup(this.selected, mentionId);
        current.delete(label);
        for (const descendant of this.tax.descendantsOf(label)) {
            current.delete(descendant);
        }
        this.markDirty(mentionId);
    }
    state(mentionId) {
        const state = this.states.get(mentionId);
        if (state === undefined)
            throw new Error(`unknown mention: ${mentionId}`);
        return state;
    }
    isDirty(mentionId) {
        return this.state(mentionId) !== "clean";
    }
    get queuedCount() {
        return this.queue.size;
    }
    /**
     * Seed selections from a prior session: the mentions this annotator has
     * covered (per the progress endpoint) take their labels from the
     * support-1 consensus of this document.
     */
    restore(myMentions, labelsByMention) {
        for (const mentionId of myMentions) {
            if (!this.selected.has(mentionId))
                continue;
            const labels = this.tax.closure(labelsByMention[mentionId] ?? []);
            this.selected.set(mentionId, new Set(labels));
            this.acked.set(mentionId, new Set(labels));
            this.states.set(mentionId, "clean");
        }
    }
    async save(mentionId) {
        const labels = [...this.lookup(this.selected, mentionId)].sort();
        this.states.set(mentionId, "saving");
        try {
            await this.api.postAnnotation({
                annotator: this.annotator,
                document: this.doc.id,
                mention: mentionId,
                labels,
            });
        }
        catch (failure) {
            if (failure instanceof ApiError) {
                // the server understood and refused; undo the local edit
                this.selected.set(mentionId, new Set(this.lookup(this.acked, mentionId)));
                this.states.set(mentionId, "clean");
                this.queue.delete(mentionId);
                return "rejected";
            }
            // queue the latest selection, which may be newer than the snapshot
            // this attempt carried
            this.queue.set(mentionId, [...this.lookup(this.selected, mentionId)].sort());
            this.states.set(mentionId, "queued");
            return "queued";
        }
        this.queue.delete(mentionId);
        this.acked.set(mentionId, new Set(labels));
        // edits made while the POST was in flight keep the mention dirty
        const now = [...this.lookup(this.selected, mentionId)].sort();
        this.states.set(mentionId, now.join("\n") === labels.join("\n") ? "clean" : "dirty");
        return "saved";
    }
    /** Retry queued saves. Returns how many are still queued afterwards. */
    async flushQueue() {
        for (const mentionId of [...this.queue.keys()]) {
            await this.save(mentionId);
        }
        return this.queue.size;
    }
    lookup(store, mentionId) {
        const entry = store.get(mentionId);
        if (entry === undefined)
            throw new Error(`unknown mention: ${mentionId}`);
        return entry;
    }
    markDirty(mentionId) {
        const now = [...this.lookup(this.selected, mentionId)].sort();
        const base = [...this.lookup(this.acked, mentionId)].sort();
        const same = now.join("\n") === base.join("\n");
        if (this.state(mentionId) === "queued" && !same) {
            this.queue.set(mentionId, now);
            return;
        }
        this.queue.delete(mentionId);
        this.states.set(mentionId, same ? "clean" : "dirty");
    }
}
