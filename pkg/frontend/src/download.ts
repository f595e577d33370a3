/** File download with an injectable sink so tests can capture the bytes
 * (jsdom has no real download pipeline). */

export type DownloadSink = (filename: string, content: string, mediaType: string) => void;

function browserDownload(filename: string, content: string, mediaType: string): void {
  const blob = new Blob([content], { type: mediaType });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  document.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}

let sink: DownloadSink = browserDownload;

export function setDownloadSink(custom: DownloadSink): void {
  sink = custom;
}

export function resetDownloadSink(): void {
  sink = browserDownload;
}

export function triggerDownload(
  filename: string,
  content: string,
  mediaType = "application/json",
): void {
  sink(filename, content, mediaType);
}
