// Fixture-backed fetch. Requests must arrive in the recorded order with the
// recorded bodies; anything else is a contract violation and fails the test.

export interface Exchange {
  method: string;
  path: string;
  status: number;
  request_body?: unknown;
  response: unknown;
}

function stable(value: unknown): string {
  if (Array.isArray(value)) return `[${value.map(stable).join(",")}]`;
  if (value && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => `${JSON.stringify(k)}:${stable(v)}`);
    return `{${entries.join(",")}}`;
  }
  return JSON.stringify(value);
}

export function installFetch(exchanges: Exchange[]): { remaining(): number } {
  let next = 0;
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = typeof input === "string" ? input : input instanceof URL ? input.href : input.url;
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const expected = exchanges[next];
    if (!expected) {
      throw new Error(`unexpected request past end of fixture: ${method} ${path}`);
    }
    next += 1;
    if (expected.method !== method || expected.path !== path) {
      throw new Error(
        `request ${next} mismatch: got ${method} ${path}, ` +
          `fixture has ${expected.method} ${expected.path}`,
      );
    }
    if (expected.request_body !== undefined) {
      const got = init?.body ? JSON.parse(String(init.body)) : undefined;
      if (stable(got) !== stable(expected.request_body)) {
        throw new Error(`request ${next} body differs from the recording`);
      }
    }
    return new Response(JSON.stringify(expected.response), {
      status: expected.status,
      headers: { "Content-Type": "application/json" },
    });
  }) as typeof fetch;
  return { remaining: () => exchanges.length - next };
}
