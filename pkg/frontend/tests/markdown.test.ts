import { describe, expect, it } from "vitest";

import { escapeHtml, renderRichText, splitMath } from "../src/markdown.js";

describe("rich text rendering", () => {
  it("escapes html", () => {
    expect(escapeHtml("<script>alert(1)</script>")).not.toContain("<script>");
    expect(renderRichText("a <b> c")).toContain("&lt;b&gt;");
  });

  it("splits inline and block math", () => {
    const segments = splitMath("before $x^2$ middle $$\\int f$$ after");
    expect(segments.map((segment) => segment.kind)).toEqual([
      "text",
      "math-inline",
      "text",
      "math-block",
      "text",
    ]);
    expect(segments[1]?.body).toBe("x^2");
    expect(segments[3]?.body).toBe("\\int f");
  });

  it("keeps raw tex in a data attribute for a client-side typesetter", () => {
    const html = renderRichText("energy $E = mc^2$");
    expect(html).toContain('class="math"');
    expect(html).toContain('data-tex="E = mc^2"');
  });

  it("renders emphasis, code, and asset images", () => {
    const html = renderRichText("**bold** and *soft* and `x+1` ![plot](asset:abc123)");
    expect(html).toContain("<strong>bold</strong>");
    expect(html).toContain("<em>soft</em>");
    expect(html).toContain("<code>x+1</code>");
    expect(html).toContain('src="/assets/abc123"');
  });

  it("builds paragraphs from blank lines", () => {
    const html = renderRichText("first\n\nsecond");
    expect(html.match(/<p>/g)).toHaveLength(2);
  });
});
