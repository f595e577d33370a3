/** Client-side mirror of the server's URL rule, for instant feedback.
 * The server stays authoritative; this only pre-empts the round trip. */

const ALLOWED_SCHEMES = ["http", "https", "ftp", "doi"];

export function urlSyntaxError(text: string): string | null {
  if (!text.trim()) {
    return "empty value";
  }
  if (/\s/.test(text) || [...text].some((ch) => ch.charCodeAt(0) < 0x20)) {
    return "whitespace or control character in URL";
  }
  const match = /^([A-Za-z][A-Za-z0-9+.-]*):(.*)$/.exec(text);
  if (!match) {
    return "not an absolute URL (missing scheme)";
  }
  const scheme = match[1]!.toLowerCase();
  const rest = match[2]!;
  if (!ALLOWED_SCHEMES.includes(scheme)) {
    return `scheme '${scheme}' not allowed (expected one of ${ALLOWED_SCHEMES.join(", ")})`;
  }
  if (scheme === "doi") {
    return rest.length > 0 ? null : "doi URL has no identifier";
  }
  const hostMatch = /^\/\/([^/?#]*)/.exec(rest);
  if (!hostMatch || !hostMatch[1]) {
    return "URL has no host";
  }
  return null;
}
