/**
 * Token rule mirror.
 *
 * Tokens are maximal runs of alphanumerics and apostrophes containing
 * at least one alphanumeric, lowercased. This must agree with the
 * pipeline's tokenizer or the hash embeddings drift; the parity test
 * checks real vectors against the installed pipeline. Iteration is by
 * code point, not UTF-16 unit, so astral-plane letters behave.
 */

const ALNUM = /^[\p{L}\p{N}]$/u;
const APOSTROPHE = "'";

function isTokenChar(cp: string): boolean {
  return ALNUM.test(cp) || cp === APOSTROPHE;
}

export function tokenize(text: string): string[] {
  const tokens: string[] = [];
  const n = text.length;
  let i = 0;
  while (i < n) {
    const first = String.fromCodePoint(text.codePointAt(i)!);
    if (isTokenChar(first)) {
      let j = i;
      let hasAlnum = false;
      while (j < n) {
        const cp = String.fromCodePoint(text.codePointAt(j)!);
        if (!isTokenChar(cp)) break;
        if (cp !== APOSTROPHE) hasAlnum = true;
        j += cp.length;
      }
      if (hasAlnum) tokens.push(text.slice(i, j).toLowerCase());
      i = j;
    } else {
      i += first.length;
    }
  }
  return tokens;
}
