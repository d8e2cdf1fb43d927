/** Attribute autocomplete driven by the schema catalog. */

import type { SchemaCatalog } from "./types.js";

export interface Suggestion {
  label: string;
  /** full replacement text for the token under the caret */
  insert: string;
}

/** The `namespace.partialName` token ending at the caret, if any. */
export function tokenAtCaret(
  text: string,
  caret: number,
): { start: number; namespace: string | null; prefix: string } | null {
  let start = caret;
  while (start > 0 && /[A-Za-z0-9_.]/.test(text[start - 1])) start -= 1;
  if (start === caret) return null;
  const token = text.slice(start, caret);
  const dot = token.indexOf(".");
  if (dot < 0) return { start, namespace: null, prefix: token };
  return {
    start,
    namespace: token.slice(0, dot),
    prefix: token.slice(dot + 1),
  };
}

/** Suggestions for the token under the caret: namespaces first, then
 * attributes of the typed namespace (aliases included). */
export function suggest(
  catalog: SchemaCatalog,
  ruleClass: string,
  text: string,
  caret: number,
  limit = 12,
): Suggestion[] {
  const token = tokenAtCaret(text, caret);
  if (!token) return [];
  const namespaces = catalog.classNamespaces[ruleClass] ?? [];
  if (token.namespace === null) {
    return namespaces
      .filter((ns) => ns.startsWith(token.prefix))
      .slice(0, limit)
      .map((ns) => ({ label: ns, insert: `${ns}.` }));
  }
  if (!namespaces.includes(token.namespace)) return [];
  const columns = catalog.namespaces[token.namespace] ?? [];
  const aliases = Object.keys(catalog.aliases).filter((a) =>
    columns.includes(catalog.aliases[a]),
  );
  const pool = [...columns, ...aliases];
  return pool
    .filter((name) => name.startsWith(token.prefix))
    .slice(0, limit)
    .map((name) => ({
      label: name,
      insert: `${token.namespace}.${name}`,
    }));
}
