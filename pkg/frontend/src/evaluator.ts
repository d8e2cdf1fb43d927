/** Client-side rule expression evaluator.
 *
 * Used only for display validation: when a node card is highlighted, the
 * client re-checks that its attributes really satisfy the applied rule.
 * Mirrors the server grammar (OR < AND < comparisons < additive <
 * multiplicative < unary NOT/minus) over a namespace -> attribute -> value
 * context. Never used for counting; counts always come from the API.
 */

export type EvalContext = Record<string, Record<string, number>>;

type Token =
  | { kind: "number"; value: number }
  | { kind: "ident"; value: string }
  | { kind: "op"; value: string }
  | { kind: "keyword"; value: string };

const TWO_CHAR = ["<=", ">=", "!="];
const ONE_CHAR = "<>=+-*/().";
const KEYWORDS = new Set(["AND", "OR", "NOT"]);

export function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  let i = 0;
  while (i < text.length) {
    const ch = text[i];
    if (ch === " " || ch === "\t" || ch === "\n" || ch === "\r") {
      i += 1;
      continue;
    }
    const two = text.slice(i, i + 2);
    if (TWO_CHAR.includes(two)) {
      tokens.push({ kind: "op", value: two });
      i += 2;
      continue;
    }
    if (ONE_CHAR.includes(ch)) {
      tokens.push({ kind: "op", value: ch });
      i += 1;
      continue;
    }
    if (/[0-9]/.test(ch)) {
      let j = i;
      while (j < text.length && /[0-9.]/.test(text[j])) j += 1;
      tokens.push({ kind: "number", value: parseFloat(text.slice(i, j)) });
      i = j;
      continue;
    }
    if (/[A-Za-z_]/.test(ch)) {
      let j = i;
      while (j < text.length && /[A-Za-z0-9_]/.test(text[j])) j += 1;
      const word = text.slice(i, j);
      tokens.push(
        KEYWORDS.has(word)
          ? { kind: "keyword", value: word }
          : { kind: "ident", value: word },
      );
      i = j;
      continue;
    }
    throw new Error(`unexpected character ${ch}`);
  }
  return tokens;
}

class Parser {
  pos = 0;
  constructor(
    private tokens: Token[],
    private ctx: EvalContext,
    private aliases: Record<string, string>,
  ) {}

  peek(): Token | undefined {
    return this.tokens[this.pos];
  }

  takeOp(op: string): boolean {
    const tok = this.peek();
    if (tok && tok.kind === "op" && tok.value === op) {
      this.pos += 1;
      return true;
    }
    return false;
  }

  takeKeyword(word: string): boolean {
    const tok = this.peek();
    if (tok && tok.kind === "keyword" && tok.value === word) {
      this.pos += 1;
      return true;
    }
    return false;
  }

  orExpr(): number | boolean {
    let left = this.andExpr();
    while (this.takeKeyword("OR")) {
      const right = this.andExpr();
      left = Boolean(left) || Boolean(right);
    }
    return left;
  }

  andExpr(): number | boolean {
    let left = this.cmpExpr();
    while (this.takeKeyword("AND")) {
      const right = this.cmpExpr();
      left = Boolean(left) && Boolean(right);
    }
    return left;
  }

  cmpExpr(): number | boolean {
    const left = this.sum();
    const tok = this.peek();
    if (tok && tok.kind === "op" && ["<", "<=", "=", "!=", ">", ">="].includes(tok.value)) {
      this.pos += 1;
      const right = this.sum();
      const l = left as number;
      const r = right as number;
      switch (tok.value) {
        case "<":
          return l < r;
        case "<=":
          return l <= r;
        case "=":
          return l === r;
        case "!=":
          return l !== r;
        case ">":
          return l > r;
        default:
          return l >= r;
      }
    }
    return left;
  }

  sum(): number | boolean {
    let left = this.term();
    for (;;) {
      if (this.takeOp("+")) left = (left as number) + (this.term() as number);
      else if (this.takeOp("-")) left = (left as number) - (this.term() as number);
      else return left;
    }
  }

  term(): number | boolean {
    let left = this.factor();
    for (;;) {
      if (this.takeOp("*")) left = (left as number) * (this.factor() as number);
      else if (this.takeOp("/")) {
        const divisor = this.factor() as number;
        if (divisor === 0) throw new Error("division by zero");
        left = (left as number) / divisor;
      } else return left;
    }
  }

  factor(): number | boolean {
    if (this.takeKeyword("NOT")) return !this.factor();
    if (this.takeOp("-")) return -(this.factor() as number);
    const tok = this.peek();
    if (!tok) throw new Error("unexpected end of rule");
    if (tok.kind === "number") {
      this.pos += 1;
      return tok.value;
    }
    if (this.takeOp("(")) {
      const inner = this.orExpr();
      if (!this.takeOp(")")) throw new Error("missing ')'");
      return inner;
    }
    if (tok.kind === "ident") {
      this.pos += 1;
      if (!this.takeOp(".")) throw new Error(`expected '.' after ${tok.value}`);
      const nameTok = this.peek();
      if (!nameTok || nameTok.kind !== "ident") {
        throw new Error("expected attribute name");
      }
      this.pos += 1;
      const ns = this.ctx[tok.value];
      if (!ns) throw new Error(`namespace ${tok.value} unavailable`);
      const name = this.aliases[nameTok.value] ?? nameTok.value;
      const value = ns[name];
      if (value === undefined) {
        throw new Error(`attribute ${tok.value}.${nameTok.value} unavailable`);
      }
      return value;
    }
    throw new Error(`unexpected token ${JSON.stringify(tok)}`);
  }
}

/** Evaluate a rule expression against a context. Throws when the context
 * lacks a referenced namespace/attribute (symmetry twins are not present in
 * slice payloads, for example). */
export function evaluateRule(
  text: string,
  ctx: EvalContext,
  aliases: Record<string, string> = {},
): boolean {
  const parser = new Parser(tokenize(text), ctx, aliases);
  const result = parser.orExpr();
  if (parser.pos !== tokenize(text).length) {
    throw new Error("trailing tokens in rule");
  }
  return Boolean(result);
}
