import { describe, expect, it } from "vitest";
import { ApiError } from "../src/api.js";
import type { AnnotationBody } from "../src/api.js";
import { AnnotationSession } from "../src/state.js";
import type { AnnotationPoster } from "../src/state.js";
import { TaxonomyIndex } from "../src/taxonomy.js";
import { doc, labelInfos } from "./helpers.js";

const TAX = new TaxonomyIndex(
  labelInfos(["person/artist/actor", "organization/company", "other/legal"]),
);

class FakePoster implements AnnotationPoster {
  posts: AnnotationBody[] = [];
  mode: "ok" | "reject" | "down" = "ok";

  async postAnnotation(body: AnnotationBody): Promise<void> {
    if (this.mode === "reject") throw new ApiError(400, "bad labels");
    if (this.mode === "down") throw new TypeError("fetch failed");
    this.posts.push(body);
  }
}

function session(poster = new FakePoster()) {
  const d = doc("d1", ["Ada", "joined", "Vex", "Corp", "."], [
    { id: "m0", start: 0, end: 1 },
    { id: "m1", start: 2, end: 4, head: 3 },
  ]);
  return { s: new AnnotationSession(TAX, d, "ann1", poster), poster };
}

describe("selection", () => {
  it("selecting a deep label pulls in its ancestors", () => {
    const { s } = session();
    s.selectLabel("m0", "person/artist/actor");
    expect([...s.selection("m0")].sort()).toEqual([
      "person",
      "person/artist",
      "person/artist/actor",
    ]);
  });

  it("removing a label backs off to the parent chain", () => {
    const { s } = session();
    s.selectLabel("m0", "person/artist/actor");
    s.removeLabel("m0", "person/artist/actor");
    expect([...s.selection("m0")].sort()).toEqual(["person", "person/artist"]);
  });

  it("removing an inner label drops the selected subtree", () => {
    const { s } = session();
    s.selectLabel("m0", "person/artist/actor");
    s.removeLabel("m0", "person");
    expect([...s.selection("m0")]).toEqual([]);
  });

  it("multiple branches can be selected at once", () => {
    const { s } = session();
    s.selectLabel("m1", "organization/company");
    s.selectLabel("m1", "other");
    expect([...s.selection("m1")].sort()).toEqual([
      "organization",
      "organization/company",
      "other",
    ]);
  });

  it("rejects labels outside the taxonomy", () => {
    const { s } = session();
    expect(() => s.selectLabel("m0", "alien")).toThrow(/unknown label/);
  });
});

describe("cursor", () => {
  it("wraps in both directions", () => {
    const { s } = session();
    expect(s.currentMention).toBe("m0");
    s.next();
    expect(s.currentMention).toBe("m1");
    s.next();
    expect(s.currentMention).toBe("m0");
    s.prev();
    expect(s.currentMention).toBe("m1");
  });

  it("stays at -1 for a mentionless document", () => {
    const empty = doc("d2", ["Nothing", "here"], []);
    const s = new AnnotationSession(TAX, empty, "ann1", new FakePoster());
    expect(s.currentMention).toBeNull();
    s.next();
    expect(s.currentMention).toBeNull();
  });
});

describe("saving", () => {
  it("is not reported clean before the server acknowledges", async () => {
    let release: () => void = () => {};
    const gate = new Promise<void>((resolve) => (release = resolve));
    const poster: AnnotationPoster = {
      postAnnotation: () => gate,
    };
    const d = doc("d1", ["Ada"], [{ id: "m0" }]);
    const s = new AnnotationSession(TAX, d, "ann1", poster);
    s.selectLabel("m0", "other");
    const pending = s.save("m0");
    expect(s.state("m0")).toBe("saving");
    release();
    expect(await pending).toBe("saved");
    expect(s.state("m0")).toBe("clean");
  });

  it("posts closed sorted labels with the annotator id", async () => {
    const { s, poster } = session();
    s.selectLabel("m1", "organization/company");
    await s.save("m1");
    expect(poster.posts).toEqual([
      {
        annotator: "ann1",
        document: "d1",
        mention: "m1",
        labels: ["organization", "organization/company"],
      },
    ]);
  });

  it("tracks the dirty flag across edit and save", async () => {
    const { s } = session();
    expect(s.isDirty("m0")).toBe(false);
    s.selectLabel("m0", "other");
    expect(s.isDirty("m0")).toBe(true);
    await s.save("m0");
    expect(s.isDirty("m0")).toBe(false);
    // reverting to the acked set is clean again without a save
    s.selectLabel("m0", "other/legal");
    s.removeLabel("m0", "other/legal");
    expect(s.isDirty("m0")).toBe(false);
  });

  it("rolls the selection back when the server rejects", async () => {
    const { s, poster } = session();
    s.selectLabel("m0", "other");
    await s.save("m0");
    poster.mode = "reject";
    s.selectLabel("m0", "person");
    expect(await s.save("m0")).toBe("rejected");
    expect([...s.selection("m0")]).toEqual(["other"]);
    expect(s.state("m0")).toBe("clean");
  });

  it("queues on network failure and drains on recovery", async () => {
    const { s, poster } = session();
    poster.mode = "down";
    s.selectLabel("m0", "other");
    expect(await s.save("m0")).toBe("queued");
    expect(s.state("m0")).toBe("queued");
    expect(s.queuedCount).toBe(1);
    expect(await s.flushQueue()).toBe(1);

    poster.mode = "ok";
    expect(await s.flushQueue()).toBe(0);
    expect(s.state("m0")).toBe("clean");
    expect(poster.posts.map((p) => p.mention)).toEqual(["m0"]);
  });

  it("a queued mention keeps the newest selection", async () => {
    const { s, poster } = session();
    poster.mode = "down";
    s.selectLabel("m0", "other");
    await s.save("m0");
    s.selectLabel("m0", "other/legal");
    poster.mode = "ok";
    await s.flushQueue();
    expect(poster.posts[0].labels).toEqual(["other", "other/legal"]);
    expect(s.state("m0")).toBe("clean");
  });
});

describe("restore", () => {
  it("seeds selections for covered mentions only, closed", () => {
    const { s } = session();
    s.restore(["m0"], { m0: ["person/artist"], m1: ["other"] });
    expect([...s.selection("m0")].sort()).toEqual(["person", "person/artist"]);
    expect([...s.selection("m1")]).toEqual([]);
    expect(s.isDirty("m0")).toBe(false);
  });

  it("ignores mentions that are not in the document", () => {
    const { s } = session();
    s.restore(["ghost"], { ghost: ["person"] });
    expect([...s.selection("m0")]).toEqual([]);
  });
});
