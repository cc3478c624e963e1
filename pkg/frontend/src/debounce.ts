/** Trailing-edge debounce; the recommendation panel uses >= 150 ms so a
 * burst of keystrokes costs one request. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs = 150,
): ((...args: A) => void) & { cancel: () => void } {
  let timer: ReturnType<typeof setTimeout> | null = null;
  const wrapped = (...args: A) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, waitMs);
  };
  wrapped.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
  };
  return wrapped;
}
