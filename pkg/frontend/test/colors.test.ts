import { describe, expect, it } from "vitest";

import { categoryColor, categoryName, CATEGORY_COLORS, INVALID_COLOR } from "../src/colors.js";

describe("category byte codes", () => {
  it("maps exactly 0 green, 1 blue, 2 red, 3 yellow", () => {
    expect(categoryName(0)).toBe("green");
    expect(categoryName(1)).toBe("blue");
    expect(categoryName(2)).toBe("red");
    expect(categoryName(3)).toBe("yellow");
  });

  it("treats everything else as invalid", () => {
    expect(categoryName(4)).toBe("invalid");
    expect(categoryName(255)).toBe("invalid");
    expect(categoryName(-1)).toBe("invalid");
  });

  it("colors follow the same mapping", () => {
    expect(categoryColor(0)).toBe(CATEGORY_COLORS.green);
    expect(categoryColor(1)).toBe(CATEGORY_COLORS.blue);
    expect(categoryColor(2)).toBe(CATEGORY_COLORS.red);
    expect(categoryColor(3)).toBe(CATEGORY_COLORS.yellow);
    expect(categoryColor(255)).toBe(INVALID_COLOR);
  });
});
