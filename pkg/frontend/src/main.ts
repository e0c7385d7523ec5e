/** Browser entry point: wires the API client, the session view and the
 * renderer. One active session per tab; every decision waits for the
 * server's acknowledgment before the view changes. */

import { GridGameClient } from './api.js';
import { ClientSessionView } from './session.js';
import { AdviceState, render, UiHandlers } from './ui.js';

function apiBaseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get('api') ?? 'http://localhost:8000';
}

export function bootstrap(root: HTMLElement, baseUrl: string = apiBaseUrl()): void {
  const client = new GridGameClient(baseUrl);
  const view = new ClientSessionView(client);
  const advice: AdviceState = { enabled: false, cutoffs: null };

  const rerender = () => render(root, view, advice, handlers);

  const handlers: UiHandlers = {
    onStart: (params) => {
      view
        .start(params)
        .then(rerender)
        .catch((err) => {
          view.lastError = String(err instanceof Error ? err.message : err);
          rerender();
        });
    },
    onSell: (units) => {
      void view.playDay(units).then(rerender);
    },
    onInput: (value) => {
      view.pendingUnits = value;
    },
    onToggleAdvice: (enabled) => {
      advice.enabled = enabled;
      if (enabled && advice.cutoffs === null) {
        client
          .getCutoffs()
          .then((cutoffs) => {
            advice.cutoffs = cutoffs;
            rerender();
          })
          .catch(() => {
            advice.cutoffs = null;
            rerender();
          });
      } else {
        rerender();
      }
    },
  };

  rerender();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  bootstrap(document.getElementById('app') as HTMLElement);
}
