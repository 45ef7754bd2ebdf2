// Minimal renderer for the service's rich-text format: markdown subset plus
// $...$ / $$...$$ math delimiters and image references by asset id.  Math is
// emitted as a tagged span holding the raw TeX so a client-side math
// typesetter can pick it up; nothing is evaluated here.

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

interface Segment {
  kind: "text" | "math-inline" | "math-block";
  body: string;
}

export function splitMath(text: string): Segment[] {
  const segments: Segment[] = [];
  let rest = text;
  const pattern = /\$\$([^$]+)\$\$|\$([^$\n]+)\$/;
  while (rest.length > 0) {
    const match = pattern.exec(rest);
    if (!match || match.index === undefined) {
      segments.push({ kind: "text", body: rest });
      break;
    }
    if (match.index > 0) {
      segments.push({ kind: "text", body: rest.slice(0, match.index) });
    }
    if (match[1] !== undefined) {
      segments.push({ kind: "math-block", body: match[1] });
    } else {
      segments.push({ kind: "math-inline", body: match[2] ?? "" });
    }
    rest = rest.slice(match.index + match[0].length);
  }
  return segments;
}

function inlineMarkdown(text: string): string {
  return escapeHtml(text)
    .replace(/\*\*([^*]+)\*\*/g, "<strong>$1</strong>")
    .replace(/\*([^*]+)\*/g, "<em>$1</em>")
    .replace(/`([^`]+)`/g, "<code>$1</code>")
    .replace(/!\[([^\]]*)\]\(asset:([\w-]+)\)/g, '<img alt="$1" src="/assets/$2">');
}

export function renderRichText(text: string): string {
  const paragraphs = text.split(/\n{2,}/).filter((p) => p.trim().length > 0);
  const rendered = paragraphs.map((paragraph) => {
    const parts = splitMath(paragraph).map((segment) => {
      if (segment.kind === "text") return inlineMarkdown(segment.body);
      const tag = segment.kind === "math-block" ? "div" : "span";
      return `<${tag} class="math" data-tex="${escapeHtml(segment.body)}">${escapeHtml(
        segment.body,
      )}</${tag}>`;
    });
    return `<p>${parts.join("")}</p>`;
  });
  return rendered.join("\n");
}
