// Discrepancy categories come over the wire as byte codes. The mapping is
// fixed: 0 green (both static), 1 blue (both dynamic), 2 red (supervised
// static, predictive dynamic), 3 yellow (the reverse). 255 marks points the
// pipeline never assessed; those never appear in scene payloads.

export const CATEGORY_NAMES = ["green", "blue", "red", "yellow"] as const;

export type CategoryName = (typeof CATEGORY_NAMES)[number];

export const CATEGORY_COLORS: Record<CategoryName, string> = {
  green: "#4ade80",
  blue: "#60a5fa",
  red: "#f87171",
  yellow: "#facc15",
};

export const INVALID_COLOR = "#71717a";

export function categoryName(code: number): CategoryName | "invalid" {
  return code >= 0 && code < CATEGORY_NAMES.length
    ? CATEGORY_NAMES[code]
    : "invalid";
}

export function categoryColor(code: number): string {
  const name = categoryName(code);
  return name === "invalid" ? INVALID_COLOR : CATEGORY_COLORS[name];
}
