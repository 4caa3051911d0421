/** Sandboxed rendering of interactive artifact documents.
 *
 * Artifacts are self-contained single-file documents; they render inside an
 * iframe that allows scripts but nothing else - no same-origin access, no
 * navigation, no network beyond the document itself (the engine already
 * rejects external references before accepting an artifact).
 */

export interface FrameSpec {
  srcdoc: string;
  sandbox: string;
  referrerPolicy: ReferrerPolicy;
  csp: string;
}

export function artifactFrameSpec(documentHtml: string): FrameSpec {
  return {
    srcdoc: documentHtml,
    sandbox: "allow-scripts",
    referrerPolicy: "no-referrer",
    csp: "default-src 'none'; script-src 'unsafe-inline'; style-src 'unsafe-inline'; img-src data:",
  };
}

export function createArtifactFrame(doc: Document, documentHtml: string): HTMLIFrameElement {
  const spec = artifactFrameSpec(documentHtml);
  const frame = doc.createElement("iframe");
  frame.setAttribute("sandbox", spec.sandbox);
  frame.setAttribute("referrerpolicy", spec.referrerPolicy);
  frame.setAttribute("csp", spec.csp);
  frame.className = "artifact-frame";
  frame.srcdoc = spec.srcdoc;
  return frame;
}
