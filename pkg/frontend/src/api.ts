/** Thin typed client over the grid-game HTTP+JSON API. The server is the
 * single authority: this module never fabricates state and never sees a
 * price before its day. */

export interface AtLeastOnceRow {
  price_index: number;
  price_dollars: string;
  probability: number;
}

export interface HistoryRow {
  day: number;
  price_index: number;
  price_dollars: string;
  generated: number;
  units_sold: number;
}

export interface Bulletin {
  session_id: string;
  status: 'active' | 'completed';
  day: number;
  days_total: number;
  days_remaining: number;
  profit_index: number;
  profit_dollars: string;
  stored_units: number;
  history: HistoryRow[];
  generated_yesterday?: number;
  day_kind?: string;
  todays_price_index?: number;
  todays_price_dollars?: string;
  at_least_once?: AtLeastOnceRow[];
}

export interface FitSummary {
  best_window: string;
  best_windows: string[];
  score: number;
  unbounded_score: number;
  scores: Record<string, number>;
}

export interface Report {
  session_id: string;
  status: string;
  profit_index: number;
  profit_dollars: string;
  sell_days: number;
  fits: { md: FitSummary; pd: FitSummary };
  unbounded_model: { profit_index: number; profit_dollars: string; sell_days: number };
  hindsight: { max_profit_index: number; max_profit_dollars: string };
}

export interface DecisionResponse {
  accepted: boolean;
  state: Bulletin;
  report?: Report;
}

export interface CreateSessionParams {
  days?: number;
  seed?: number;
  initial_units?: number;
  weekend_offset?: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(detail);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function readDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === 'string') return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return `request failed with status ${response.status}`;
  }
}

export class GridGameClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw new ApiError(response.status, await readDetail(response));
    }
    return (await response.json()) as T;
  }

  private async requestText(path: string): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw new ApiError(response.status, await readDetail(response));
    }
    return response.text();
  }

  createSession(params: CreateSessionParams = {}): Promise<{ session_id: string; state: Bulletin }> {
    return this.request('/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(params),
    });
  }

  getState(sessionId: string): Promise<Bulletin> {
    return this.request(`/sessions/${sessionId}/state`);
  }

  /** Server-side state recomputed from the event log; used to assert the
   * client view matches the authoritative record. */
  getReplay(sessionId: string): Promise<Bulletin> {
    return this.request(`/sessions/${sessionId}/replay`);
  }

  submitDecision(sessionId: string, units: number, day: number): Promise<DecisionResponse> {
    return this.request(`/sessions/${sessionId}/decisions`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ units, day }),
    });
  }

  getReport(sessionId: string): Promise<Report> {
    return this.request(`/sessions/${sessionId}/report`);
  }

  getTraceCsv(sessionId: string): Promise<string> {
    return this.requestText(`/sessions/${sessionId}/trace.csv`);
  }

  /** Cutoff price per schedule index from the advice CSV. */
  async getCutoffs(maxIndex = 67): Promise<number[]> {
    const text = await this.requestText(`/cutoffs.csv?max_index=${maxIndex}`);
    const rows = text.trim().split('\n').slice(1);
    return rows.map((row) => Number(row.split(',')[1]));
  }
}
