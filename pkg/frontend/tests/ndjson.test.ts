import { describe, expect, it } from "vitest";
import { parseNdjson } from "../src/ndjson.js";

function streamOf(chunks: string[]): ReadableStream<Uint8Array> {
  const encoder = new TextEncoder();
  return new ReadableStream({
    start(controller) {
      for (const chunk of chunks) controller.enqueue(encoder.encode(chunk));
      controller.close();
    },
  });
}

async function collect<T>(stream: ReadableStream<Uint8Array>): Promise<T[]> {
  const out: T[] = [];
  for await (const line of parseNdjson<T>(stream)) out.push(line);
  return out;
}

describe("parseNdjson", () => {
  it("parses one document per line", async () => {
    const lines = await collect(streamOf(['{"a": 1}\n{"a": 2}\n{"a": 3}\n']));
    expect(lines).toEqual([{ a: 1 }, { a: 2 }, { a: 3 }]);
  });

  it("survives chunk boundaries inside a document", async () => {
    const lines = await collect(
      streamOf(['{"step": 1, "max_d', 'elta": 0.5}\n{"ev', 'ent": "done"}\n'])
    );
    expect(lines).toEqual([{ step: 1, max_delta: 0.5 }, { event: "done" }]);
  });

  it("handles several lines arriving in one chunk", async () => {
    const lines = await collect(streamOf(['{"a":1}\n{"a":2}\n', '{"a":3}\n']));
    expect(lines).toHaveLength(3);
  });

  it("flushes a trailing document without a newline", async () => {
    const lines = await collect(streamOf(['{"a":1}\n{"done":true}']));
    expect(lines).toEqual([{ a: 1 }, { done: true }]);
  });

  it("ignores blank lines", async () => {
    const lines = await collect(streamOf(['{"a":1}\n\n\n{"a":2}\n']));
    expect(lines).toEqual([{ a: 1 }, { a: 2 }]);
  });

  it("yields nothing for an empty body", async () => {
    expect(await collect(streamOf([]))).toEqual([]);
  });
});
