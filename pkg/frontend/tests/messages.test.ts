import { describe, expect, it } from "vitest";
import { ServiceError } from "../src/api.js";
import { GestureError } from "../src/gestures.js";
import { describeError } from "../src/messages.js";

describe("describeError", () => {
  it("keeps the API code and detail verbatim", () => {
    const notice = describeError(
      new ServiceError(409, "RoundOrderError", "expected round 2, got 4")
    );
    expect(notice.text).toBe(
      "RoundOrderError (HTTP 409): expected round 2, got 4"
    );
    expect(notice.pixel).toBeUndefined();
  });

  it("locates an ambiguous seed point down to the pixel", () => {
    const notice = describeError(
      new ServiceError(
        422,
        "AmbiguousPointError",
        "phi is exactly zero at (7, 9)",
        [7, 9]
      )
    );
    expect(notice.pixel).toEqual([7, 9]);
    expect(notice.text).toContain("AmbiguousPointError (HTTP 422)");
    expect(notice.text).toContain("pixel (7, 9)");
    expect(notice.text).toContain("nudge the point");
  });

  it("mentions the failing step of a divergence", () => {
    const notice = describeError(
      new ServiceError(422, "DivergenceError", "field magnitude exceeded limit", undefined, 42)
    );
    expect(notice.text).toContain("(step 42)");
  });

  it("passes gesture problems through as written", () => {
    const notice = describeError(new GestureError("a polygon needs at least 3 vertices"));
    expect(notice.text).toBe("a polygon needs at least 3 vertices");
  });

  it("stringifies anything else", () => {
    expect(describeError(new TypeError("x is not a function")).text).toBe(
      "TypeError: x is not a function"
    );
    expect(describeError("plain").text).toBe("plain");
  });
});
