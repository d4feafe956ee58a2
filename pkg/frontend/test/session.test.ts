// Contract tests against recorded server fixtures. The console must emit
// exactly the recorded requests and derive all state from the responses.

import { describe, expect, it } from "vitest";
import { ForgeClient } from "../src/api.js";
import { diagram } from "../src/board.js";
import { SessionConsole } from "../src/session.js";
import type { MoveEntry, MovePayload, NewSessionRequest } from "../src/types.js";
import { installFetch, type Exchange } from "./fetchStub.js";
import eveSession from "./fixtures/eve-session.json";
import spoilerOpening from "./fixtures/spoiler-opening.json";

interface ScenarioStep {
  payload: MovePayload;
  expect: "ok" | "refused";
  reason?: string;
}

const exchanges = eveSession.exchanges as Exchange[];
const scenario = eveSession.scenario as unknown as ScenarioStep[];
const create = eveSession.create as NewSessionRequest;

function transcriptForm(moves: MoveEntry[]): Record<string, unknown>[] {
  return moves.map((m) => {
    const entry: Record<string, unknown> = {
      index: m.index,
      player: m.player,
      size: m.size,
    };
    if (m.full !== undefined) {
      entry.full = m.full;
    } else {
      entry.added_elements = m.added_elements ?? 0;
      entry.added_tuples = m.added_tuples ?? {};
    }
    return entry;
  });
}

async function replaySession(): Promise<SessionConsole> {
  const stub = installFetch(exchanges);
  const console_ = await SessionConsole.start(new ForgeClient(), create);
  for (const step of scenario) {
    const accepted = await console_.submitMove(step.payload);
    if (step.expect === "refused") {
      expect(accepted).toBe(false);
      expect(console_.refusal?.status).toBe(422);
      expect(console_.refusal?.reason).toBe(step.reason);
      expect(console_.refusal?.message.length).toBeGreaterThan(0);
    } else {
      expect(accepted).toBe(true);
      expect(console_.refusal).toBeNull();
    }
  }
  expect(stub.remaining()).toBe(0);
  return console_;
}

describe("human-Eve session against the recorded server", () => {
  it("replays to the transcript the CLI produced for the same moves", async () => {
    const console_ = await replaySession();
    expect(console_.view.status).toBe("finished");
    const cliMoves = eveSession.cli.transcript.moves as unknown as MoveEntry[];
    expect(console_.transcriptMoves()).toEqual(transcriptForm(cliMoves));
    expect(console_.adjudication?.outcome).toBe(
      eveSession.cli.adjudication.outcome,
    );
  });

  it("renders illegal-move reasons inline and keeps the board", async () => {
    const stub = installFetch(exchanges);
    const console_ = await SessionConsole.start(new ForgeClient(), create);
    let sawRefusal = false;
    for (const step of scenario) {
      const turnBefore = console_.view.turn;
      const accepted = await console_.submitMove(step.payload);
      if (step.expect === "refused") {
        sawRefusal = true;
        expect(accepted).toBe(false);
        expect(console_.view.turn).toBe(turnBefore);
        expect(console_.refusal?.reason).toBe(step.reason);
      } else {
        expect(console_.refusal).toBeNull();
      }
    }
    expect(sawRefusal).toBe(true);
    expect(stub.remaining()).toBe(0);
  });

  it("offers a server palette with commentary on human turns", async () => {
    installFetch(exchanges);
    const console_ = await SessionConsole.start(new ForgeClient(), create);
    expect(console_.view.your_turn).toBe(true);
    expect(console_.palette.length).toBeGreaterThan(0);
    expect(console_.commentary?.engine).toBe("generic-odd");
  });

  it("rebuilds the final board identical to the server's top", async () => {
    const console_ = await replaySession();
    const top = console_.view.top;
    expect(top).not.toBeNull();
    const last = console_.view.moves.length - 1;
    expect(console_.boardAt(last)).toEqual(diagram(top!));
  });

  it("renders deterministically across replays", async () => {
    const first = await replaySession();
    const second = await replaySession();
    expect(second.transcriptMoves()).toEqual(first.transcriptMoves());
    expect(second.currentBoard()).toEqual(first.currentBoard());
  });
});

describe("human-Odd session opening", () => {
  it("shows the spoiler opening with its why-note", async () => {
    const stub = installFetch(spoilerOpening.exchanges.slice(0, 2) as Exchange[]);
    const console_ = await SessionConsole.start(
      new ForgeClient(),
      spoilerOpening.create as NewSessionRequest,
    );
    expect(console_.view.moves[0]?.player).toBe("eve");
    expect(console_.whyOpening()).toBe("spoiler-eve: obstructed-base");
    expect(console_.view.your_turn).toBe(true);
    expect(console_.palette.length).toBeGreaterThan(0);
    expect(stub.remaining()).toBe(0);
  });

  it("surfaces an unknown class as a 404 error", async () => {
    installFetch(spoilerOpening.exchanges.slice(2) as Exchange[]);
    const bad = { class: "no-such-class", human_role: "eve", rounds: 2 };
    await expect(
      SessionConsole.start(new ForgeClient(), bad as NewSessionRequest),
    ).rejects.toMatchObject({ status: 404 });
  });
});
