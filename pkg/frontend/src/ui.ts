/** DOM rendering for the grid-game client. Every panel renders only what
 * the server has already revealed; the optional cutoff-advice overlay is
 * off by default because showing it changes the behavioral experiment. */

import { AtLeastOnceRow, Report } from './api.js';
import { ClientSessionView } from './session.js';

export interface AdviceState {
  enabled: boolean;
  /** Cutoff price per schedule index, from /cutoffs.csv; fetched lazily. */
  cutoffs: number[] | null;
}

export interface UiHandlers {
  onStart: (params: { days?: number; seed?: number }) => void;
  onSell: (units: number) => void;
  onInput: (value: string) => void;
  onToggleAdvice: (enabled: boolean) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function formatPercent(probability: number): string {
  return `${Math.round(probability * 100)}%`;
}

/** "5" -> "5 days", "1" -> "1 day", "unbounded" -> "unbounded (full horizon)". */
export function formatWindow(window: string): string {
  if (window === 'unbounded') return 'unbounded (full horizon)';
  return window === '1' ? '1 day' : `${window} days`;
}

/** Contiguous integer windows render as a band, e.g. ["4","5"] -> "4-5". */
export function formatWindowBand(windows: string[]): string {
  const numeric = windows.filter((w) => w !== 'unbounded').map(Number).sort((a, b) => a - b);
  const hasUnbounded = windows.includes('unbounded');
  if (numeric.length === 0) return 'unbounded (full horizon)';
  const contiguous = numeric.every((w, i) => i === 0 || w === (numeric[i - 1] as number) + 1);
  let band =
    numeric.length === 1 || !contiguous
      ? numeric.join(', ')
      : `${numeric[0]}-${numeric[numeric.length - 1]}`;
  if (hasUnbounded) band += ' and unbounded';
  return band;
}

export function renderProbabilityTable(rows: AtLeastOnceRow[]): HTMLElement {
  const panel = el('section', { class: 'panel probability-panel' });
  panel.appendChild(el('h2', {}, 'Chance of each price occurring at least once'));
  panel.appendChild(
    el('p', { class: 'hint' }, 'Between today and the end of the game. Updates daily.'),
  );
  const table = el('table', { class: 'probability-table' });
  const head = el('tr');
  head.appendChild(el('th', {}, 'Price'));
  head.appendChild(el('th', {}, 'Chance'));
  table.appendChild(head);
  for (const row of [...rows].sort((a, b) => b.price_index - a.price_index)) {
    const tr = el('tr');
    tr.appendChild(el('td', {}, `${row.price_dollars} per Unit`));
    tr.appendChild(el('td', {}, `${formatPercent(row.probability)} chance`));
    table.appendChild(tr);
  }
  panel.appendChild(table);
  return panel;
}

export function renderBulletin(view: ClientSessionView): HTMLElement {
  const state = view.state;
  if (!state) throw new Error('no session to render');
  const panel = el('section', { class: 'panel bulletin-panel' });
  panel.appendChild(el('h2', {}, `Day ${state.day} of ${state.days_total}`));
  const list = el('dl');
  const add = (label: string, value: string, cls: string) => {
    list.appendChild(el('dt', {}, label));
    list.appendChild(el('dd', { class: cls }, value));
  };
  add('Generated yesterday', `${state.generated_yesterday ?? 0} unit(s)`, 'generated');
  add('Stored in your battery', `${state.stored_units} unit(s)`, 'stored');
  add('Profit so far', state.profit_dollars, 'profit');
  add(
    "Today's price",
    `${state.todays_price_dollars ?? ''} per unit`,
    'todays-price',
  );
  panel.appendChild(list);
  return panel;
}

export function renderDecisionForm(view: ClientSessionView, handlers: UiHandlers): HTMLElement {
  const state = view.state;
  if (!state) throw new Error('no session to render');
  const panel = el('section', { class: 'panel decision-panel' });
  panel.appendChild(el('h2', {}, 'Do you want to sell any units today?'));
  const form = el('form', { class: 'decision-form' });
  const input = el('input', {
    type: 'number',
    name: 'units',
    min: '0',
    max: String(state.stored_units),
    value: view.pendingUnits,
    'aria-label': 'units to sell',
  });
  const sell = el('button', { type: 'submit' }, 'Sell');
  const hold = el('button', { type: 'button', class: 'hold' }, 'Hold everything');
  form.append(input, sell, hold);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    handlers.onInput(input.value);
    handlers.onSell(Number(input.value));
  });
  hold.addEventListener('click', () => {
    handlers.onInput('0');
    handlers.onSell(0);
  });
  input.addEventListener('input', () => handlers.onInput(input.value));
  panel.appendChild(form);
  if (view.lastError) {
    panel.appendChild(el('p', { class: 'error', role: 'alert' }, view.lastError));
  }
  return panel;
}

export function renderPriceChart(view: ClientSessionView): HTMLElement {
  const state = view.state;
  const panel = el('section', { class: 'panel chart-panel' });
  panel.appendChild(el('h2', {}, 'Price history'));
  const points = view.priceHistory();
  if (!state || points.length === 0) {
    panel.appendChild(el('p', { class: 'hint' }, 'No prices revealed yet.'));
    return panel;
  }
  const width = 680;
  const height = 170;
  const x = (day: number) => 12 + ((day - 1) / Math.max(state.days_total - 1, 1)) * (width - 24);
  const y = (price: number) => height - 12 - ((price - 1) / 14) * (height - 24);
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
  svg.setAttribute('class', 'price-chart');
  const line = document.createElementNS('http://www.w3.org/2000/svg', 'polyline');
  line.setAttribute('fill', 'none');
  line.setAttribute('stroke', '#2a6fdb');
  line.setAttribute('stroke-width', '2');
  line.setAttribute(
    'points',
    points.map((p) => `${x(p.day).toFixed(1)},${y(p.priceIndex).toFixed(1)}`).join(' '),
  );
  svg.appendChild(line);
  for (const d of view.decisions.filter((d) => d.units > 0)) {
    const dot = document.createElementNS('http://www.w3.org/2000/svg', 'circle');
    dot.setAttribute('cx', x(d.day).toFixed(1));
    dot.setAttribute('cy', y(d.priceIndex).toFixed(1));
    dot.setAttribute('r', '4');
    dot.setAttribute('fill', '#d64545');
    dot.appendChild(document.createElementNS('http://www.w3.org/2000/svg', 'title'));
    svg.appendChild(dot);
  }
  panel.appendChild(svg);
  return panel;
}

export function renderAdvice(view: ClientSessionView, advice: AdviceState, handlers: UiHandlers): HTMLElement {
  const panel = el('section', { class: 'panel advice-panel' });
  const label = el('label', { class: 'advice-toggle' });
  const checkbox = el('input', { type: 'checkbox' });
  if (advice.enabled) checkbox.setAttribute('checked', 'checked');
  checkbox.addEventListener('change', () => handlers.onToggleAdvice(checkbox.checked));
  label.appendChild(checkbox);
  label.appendChild(
    document.createTextNode(
      ' Show model cutoff advice (off by default: seeing it changes the experiment)',
    ),
  );
  panel.appendChild(label);
  const state = view.state;
  if (advice.enabled && advice.cutoffs && state && state.status === 'active') {
    const remainingAfterToday = state.days_total - state.day;
    const cutoff = advice.cutoffs[Math.min(remainingAfterToday, advice.cutoffs.length - 1)];
    panel.appendChild(
      el(
        'p',
        { class: 'advice' },
        `Model cutoff today: sell at $${((cutoff as number) / 10).toFixed(2)} or better ` +
          `(${remainingAfterToday} day(s) left after today).`,
      ),
    );
  }
  return panel;
}

export function renderReportPanel(report: Report): HTMLElement {
  const panel = el('section', { class: 'panel report-panel' });
  panel.appendChild(el('h2', {}, 'Game over — your results'));
  const md = report.fits.md;
  const list = el('dl');
  const add = (label: string, value: string, cls: string) => {
    list.appendChild(el('dt', {}, label));
    list.appendChild(el('dd', { class: cls }, value));
  };
  add('Your profit', report.profit_dollars, 'final-profit');
  add('Days you sold on', String(report.sell_days), 'sell-days');
  add('Best-fitting time window', formatWindow(md.best_window), 'best-window');
  if (md.best_windows.length > 1) {
    add('Equally good windows', formatWindowBand(md.best_windows), 'window-band');
  }
  add('Model deviation (mean deviation)', md.score.toFixed(4), 'deviation');
  add('Deviation if you had an unbounded horizon', md.unbounded_score.toFixed(4), 'unbounded-deviation');
  add('Profit of the unbounded-horizon strategy', report.unbounded_model.profit_dollars, 'unbounded-profit');
  add('Best possible profit in hindsight', report.hindsight.max_profit_dollars, 'hindsight-profit');
  panel.appendChild(list);
  return panel;
}

export function renderStartForm(handlers: UiHandlers): HTMLElement {
  const panel = el('section', { class: 'panel start-panel' });
  panel.appendChild(el('h2', {}, 'Start a new grid game'));
  panel.appendChild(
    el(
      'p',
      {},
      'You are a prosumer with solar panels and a battery. Each day the power ' +
        'company offers a price; sell your stored units or hold them for a better day.',
    ),
  );
  const form = el('form', { class: 'start-form' });
  const days = el('input', { type: 'number', name: 'days', value: '68', min: '1' });
  const seed = el('input', { type: 'number', name: 'seed', placeholder: 'random' });
  form.appendChild(el('label', {}, 'Days: '));
  form.appendChild(days);
  form.appendChild(el('label', {}, ' Seed: '));
  form.appendChild(seed);
  const go = el('button', { type: 'submit' }, 'Play');
  form.appendChild(go);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    handlers.onStart({
      days: Number(days.value) || 68,
      seed: seed.value === '' ? undefined : Number(seed.value),
    });
  });
  panel.appendChild(form);
  return panel;
}

/** Full-page render: start screen, active-day screen, or final report. */
export function render(
  root: HTMLElement,
  view: ClientSessionView,
  advice: AdviceState,
  handlers: UiHandlers,
): void {
  root.replaceChildren();
  root.appendChild(el('h1', {}, 'Grid Game'));
  if (!view.state) {
    root.appendChild(renderStartForm(handlers));
    return;
  }
  if (view.state.status === 'completed' && view.report) {
    root.appendChild(renderReportPanel(view.report));
    root.appendChild(renderPriceChart(view));
    return;
  }
  root.appendChild(renderBulletin(view));
  root.appendChild(renderDecisionForm(view, handlers));
  if (view.state.at_least_once) {
    root.appendChild(renderProbabilityTable(view.state.at_least_once));
  }
  root.appendChild(renderPriceChart(view));
  root.appendChild(renderAdvice(view, advice, handlers));
}
