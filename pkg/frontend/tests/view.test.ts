import { describe, expect, it } from "vitest";

import { IDENTITY } from "../src/camera";
import { parseServerMessage, setGoalFrame } from "../src/protocol";
import type { SnapshotMsg, WelcomeMsg } from "../src/protocol";
import {
  activeBanner,
  applyServerError,
  applySnapshot,
  applyWelcome,
  clickToGoal,
  initialView,
  showBanner,
} from "../src/view";
import { readGolden } from "./helpers";

function welcomeFixture(): WelcomeMsg {
  return parseServerMessage(readGolden("welcome.json")) as WelcomeMsg;
}

function snapshotFixture(): SnapshotMsg {
  return parseServerMessage(readGolden("snapshot.json")) as SnapshotMsg;
}

function connectedView(role: "operator" | "observer") {
  const view = initialView(role, false);
  const welcome = welcomeFixture();
  welcome.role = role;
  applyWelcome(view, welcome, 0);
  return view;
}

describe("welcome", () => {
  it("decodes the map and grants the role", () => {
    const view = initialView("operator", false);
    applyWelcome(view, welcomeFixture(), 0);
    expect(view.connection).toBe("connected");
    expect(view.role).toBe("operator");
    expect(view.map?.width).toBe(10);
    expect(view.map?.height).toBe(10);
    expect(view.map?.cells).toHaveLength(100);
    expect(view.map?.cells[0]).toBe(1); // bottom border wall
    expect(view.banner).toBeNull(); // granted what we asked for
  });

  it("banners a role downgrade", () => {
    const view = initialView("operator", false);
    const welcome = welcomeFixture();
    welcome.role = "observer";
    applyWelcome(view, welcome, 100);
    expect(view.role).toBe("observer");
    expect(activeBanner(view, 200)).toBe("joined as observer");
  });
});

describe("snapshots", () => {
  it("rendering state always holds the latest complete snapshot", () => {
    const view = connectedView("operator");
    const first = snapshotFixture();
    const second = snapshotFixture();
    second.tick = first.tick + 1;
    applySnapshot(view, first);
    expect(view.snapshot).toBe(first);
    applySnapshot(view, second);
    expect(view.snapshot).toBe(second);
  });
});

describe("click to goal", () => {
  it("identity camera: a click at the pixel of world (3,4) sends exactly that", () => {
    const view = connectedView("operator");
    const result = clickToGoal(view, IDENTITY, 3.0, 4.0);
    expect(result).toEqual({ kind: "goal", x: 3.0, y: 4.0 });
    if (result.kind !== "goal") {
      throw new Error("expected a goal");
    }
    expect(setGoalFrame(result.x, result.y)).toBe('{"type":"set_goal","x":3,"y":4}');
  });

  it("observer clicks show a view-only notice and send nothing", () => {
    const view = connectedView("observer");
    expect(clickToGoal(view, IDENTITY, 3.0, 4.0)).toEqual({
      kind: "notice",
      text: "view-only session",
    });
  });

  it("clicks outside the map raster are a no-op", () => {
    const view = connectedView("operator");
    expect(clickToGoal(view, IDENTITY, -0.01, 4).kind).toBe("none");
    expect(clickToGoal(view, IDENTITY, 10.0, 4).kind).toBe("none");
    expect(clickToGoal(view, IDENTITY, 4, 17.5).kind).toBe("none");
  });

  it("needs a live connection and a map", () => {
    const view = initialView("operator", false);
    expect(clickToGoal(view, IDENTITY, 3, 4).kind).toBe("none");
    const connected = connectedView("operator");
    connected.connection = "retrying";
    expect(clickToGoal(connected, IDENTITY, 3, 4).kind).toBe("none");
  });
});

describe("banners", () => {
  it("server rejections surface as a transient banner with the reason", () => {
    const view = connectedView("operator");
    applyServerError(
      view,
      { type: "error", code: "goal rejected", message: "inside obstacle" },
      1000,
    );
    expect(activeBanner(view, 2000)).toBe("goal rejected: inside obstacle");
    expect(activeBanner(view, 1000 + 4001)).toBeNull(); // expired
  });

  it("newer banners replace older ones", () => {
    const view = connectedView("operator");
    showBanner(view, "first", 0);
    showBanner(view, "second", 10);
    expect(activeBanner(view, 20)).toBe("second");
  });
});
