/** Shared test scaffolding: DOM polling, clickers, and a hash stand-in. */

export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 8000,
  label = "condition",
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 15));
  }
  throw new Error(`timed out waiting for ${label}`);
}

export function click(element: Element | null): void {
  if (!element) throw new Error("clicked a missing element");
  (element as HTMLElement).click();
}

export function textOf(root: ParentNode, selector: string): string {
  return root.querySelector(selector)?.textContent ?? "";
}

export function setInput(root: ParentNode, fieldId: string, value: string): void {
  const control = root.querySelector<HTMLInputElement>(`[data-field-id="${fieldId}"]`);
  if (!control) throw new Error(`no control for field ${fieldId}`);
  control.value = value;
}

/** In-memory substitute for location.hash so tests can simulate reloads. */
export class HashStore {
  id: string | null = null;
  get = (): string | null => this.id;
  set = (value: string | null): void => {
    this.id = value;
  };
}
