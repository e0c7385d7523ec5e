/** Client-side session view: the daily bulletin as last reported by the
 * server plus local display state (decision log, price history series,
 * pending form input). Decisions are pessimistic — nothing changes locally
 * until the server acknowledges. */

import {
  ApiError,
  Bulletin,
  CreateSessionParams,
  GridGameClient,
  Report,
} from './api.js';

export interface DecisionRecord {
  day: number;
  units: number;
  priceIndex: number;
}

export interface PricePoint {
  day: number;
  priceIndex: number;
}

export class ClientSessionView {
  state: Bulletin | null = null;
  report: Report | null = null;
  decisions: DecisionRecord[] = [];
  /** Last server rejection or guard message, shown inline. */
  lastError: string | null = null;
  /** The value typed into the units field; retained across errors. */
  pendingUnits = '';

  constructor(private readonly client: GridGameClient) {}

  get sessionId(): string {
    if (!this.state) throw new Error('no active session');
    return this.state.session_id;
  }

  async start(params: CreateSessionParams = {}): Promise<void> {
    const created = await this.client.createSession(params);
    this.state = created.state;
    this.report = null;
    this.decisions = [];
    this.lastError = null;
    this.pendingUnits = '';
  }

  /** Past prices plus today's offer — exactly what the server has revealed,
   * nothing ahead of the current day. */
  priceHistory(): PricePoint[] {
    if (!this.state) return [];
    const points: PricePoint[] = this.state.history.map((h) => ({
      day: h.day,
      priceIndex: h.price_index,
    }));
    if (this.state.status === 'active' && this.state.todays_price_index !== undefined) {
      points.push({ day: this.state.day, priceIndex: this.state.todays_price_index });
    }
    return points;
  }

  /** Client-side guard mirroring the server's validation; the server still
   * re-validates every submission. Returns a message or null when ok. */
  sellGuard(units: number): string | null {
    if (!this.state || this.state.status !== 'active') {
      return 'session is not active';
    }
    if (!Number.isInteger(units) || units < 0) {
      return 'enter a whole number of units (0 to hold)';
    }
    if (units > this.state.stored_units) {
      return `you only have ${this.state.stored_units} unit(s) stored — don't try to sell more than you have`;
    }
    return null;
  }

  /** Submit today's decision. On success the view advances to the next
   * bulletin (or the final report); on rejection the error is surfaced and
   * the entered value is kept for correction. */
  async playDay(units: number): Promise<boolean> {
    const guard = this.sellGuard(units);
    if (guard !== null) {
      this.lastError = guard;
      return false;
    }
    const state = this.state as Bulletin;
    const decidedDay = state.day;
    const priceIndex = state.todays_price_index as number;
    try {
      const response = await this.client.submitDecision(this.sessionId, units, decidedDay);
      this.decisions.push({ day: decidedDay, units, priceIndex });
      this.state = response.state;
      if (response.report) this.report = response.report;
      this.lastError = null;
      this.pendingUnits = '';
      return true;
    } catch (err) {
      if (err instanceof ApiError) {
        this.lastError = err.detail;
        return false;
      }
      throw err;
    }
  }

  /** True when the server confirms our view matches a fresh replay of its
   * event log. */
  async matchesServerReplay(): Promise<boolean> {
    const replayed = await this.client.getReplay(this.sessionId);
    return JSON.stringify(replayed) === JSON.stringify(this.state);
  }
}
