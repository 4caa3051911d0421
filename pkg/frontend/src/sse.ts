/** Incremental parser for a server-sent-events byte stream.
 *
 * Feed it raw chunks; it yields completed events (event name + parsed JSON
 * data) and tolerates events split across chunk boundaries.
 */

export interface SseEvent<T = unknown> {
  event: string;
  data: T;
}

export class SseParser<T = unknown> {
  private buffer = "";

  push(chunk: string): SseEvent<T>[] {
    this.buffer += chunk;
    const events: SseEvent<T>[] = [];
    let boundary = this.buffer.indexOf("\n\n");
    while (boundary !== -1) {
      const block = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      const parsed = this.parseBlock(block);
      if (parsed) events.push(parsed);
      boundary = this.buffer.indexOf("\n\n");
    }
    return events;
  }

  private parseBlock(block: string): SseEvent<T> | null {
    let event = "message";
    const dataLines: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith("event:")) {
        event = line.slice("event:".length).trim();
      } else if (line.startsWith("data:")) {
        dataLines.push(line.slice("data:".length).trim());
      }
    }
    if (dataLines.length === 0) return null;
    const raw = dataLines.join("\n");
    let data: T;
    try {
      data = JSON.parse(raw) as T;
    } catch {
      data = raw as unknown as T;
    }
    return { event, data };
  }
}
