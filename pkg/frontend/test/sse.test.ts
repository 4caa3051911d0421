import { describe, expect, it } from "vitest";

import { SseParser } from "../src/sse.js";

describe("SseParser", () => {
  it("parses complete event blocks", () => {
    const parser = new SseParser();
    const events = parser.push(
      'event: segment\ndata: {"index": 0, "event": "segment"}\n\n' +
        'event: turn_committed\ndata: {"index": 1}\n\n',
    );
    expect(events).toHaveLength(2);
    expect(events[0]!.event).toBe("segment");
    expect(events[1]!.data).toEqual({ index: 1 });
  });

  it("buffers events split across chunks", () => {
    const parser = new SseParser();
    expect(parser.push('event: segment\ndata: {"in')).toHaveLength(0);
    const events = parser.push('dex": 2}\n\n');
    expect(events).toHaveLength(1);
    expect(events[0]!.data).toEqual({ index: 2 });
  });

  it("keeps non-JSON data as raw text", () => {
    const parser = new SseParser<string>();
    const events = parser.push("event: note\ndata: plain words\n\n");
    expect(events[0]!.data).toBe("plain words");
  });

  it("ignores blocks without data lines", () => {
    const parser = new SseParser();
    expect(parser.push("event: ping\n\n")).toHaveLength(0);
  });
});
