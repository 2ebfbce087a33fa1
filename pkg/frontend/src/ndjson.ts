// Incremental parser for application/x-ndjson response bodies. The server
// writes one JSON document per line; chunk boundaries fall anywhere, so
// buffer until a newline before parsing.

export async function* parseNdjson<T>(
  body: ReadableStream<Uint8Array>
): AsyncGenerator<T> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let pending = "";
  try {
    while (true) {
      const { done, value } = await reader.read();
      if (done) break;
      pending += decoder.decode(value, { stream: true });
      let cut: number;
      while ((cut = pending.indexOf("\n")) >= 0) {
        const line = pending.slice(0, cut).trim();
        pending = pending.slice(cut + 1);
        if (line.length > 0) yield JSON.parse(line) as T;
      }
    }
    pending += decoder.decode();
    const tail = pending.trim();
    if (tail.length > 0) yield JSON.parse(tail) as T;
  } finally {
    reader.releaseLock();
  }
}
