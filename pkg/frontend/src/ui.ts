// HTML renderers. Everything returns strings so the view is testable
// without a DOM; main.ts assigns the result to innerHTML.

import { AdvicePanel, ConsoleView, PointView } from './model';

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function pointCell(p: PointView): string {
  const classes = ['point'];
  if (p.visits > 0) classes.push('visited');
  if (p.advised) classes.push('advised');
  const badge = p.visits > 0 ? `<span class="badge">${p.visits}</span>` : '';
  const summary =
    p.features === null
      ? ''
      : `<span class="features" title="${p.features.map((v) => v.toFixed(2)).join(', ')}"></span>`;
  return (
    `<button class="${classes.join(' ')}" data-point="${p.point}">` +
    `${p.point}${badge}${summary}</button>`
  );
}

export function renderBodyMap(points: PointView[]): string {
  const chest = points.filter((p) => p.zone === 'chest').map(pointCell).join('');
  const back = points.filter((p) => p.zone === 'back').map(pointCell).join('');
  return (
    `<div class="body-map">` +
    `<div class="zone"><h3>chest</h3>${chest}</div>` +
    `<div class="zone"><h3>back</h3>${back}</div>` +
    `</div>`
  );
}

export function renderQValues(qValues: number[]): string {
  const names = [...Array(12).keys()].map((i) => `point ${i + 1}`);
  names.push('declare healthy', 'declare chronic', 'declare acute');
  const max = Math.max(...qValues);
  const min = Math.min(...qValues);
  const span = max - min || 1;
  const bars = qValues
    .map((q, i) => {
      const width = Math.round(((q - min) / span) * 100);
      return (
        `<div class="q-row"><span class="q-name">${names[i]}</span>` +
        `<span class="q-bar" style="width:${width}%"></span>` +
        `<span class="q-value">${q.toFixed(4)}</span></div>`
      );
    })
    .join('');
  return `<div class="q-values">${bars}</div>`;
}

export function renderPanel(panel: AdvicePanel): string {
  if (panel.kind === 'limit') {
    return (
      `<div class="card limit-card"><h2>examination limit reached</h2>` +
      `<p>12 auscultations recorded; the agent gave no declaration.</p></div>`
    );
  }
  if (panel.kind === 'declared') {
    const alarm = panel.alarm
      ? '<p class="alarm on">ALARM</p>'
      : '<p class="alarm off">no alarm</p>';
    return (
      `<div class="card declaration-card">` +
      `<h2>declared: ${panel.labelName} (label ${panel.label})</h2>` +
      alarm +
      renderQValues(panel.qValues) +
      `</div>`
    );
  }
  return (
    `<div class="card advice-card">` +
    `<h2>auscultate point ${panel.point}</h2>` +
    renderQValues(panel.qValues) +
    `</div>`
  );
}

export function renderHistory(view: ConsoleView): string {
  const items = view.history
    .map((entry, i) => {
      if (entry.type === 'observation') {
        const deviated = entry.deviated ? ' <em>(differed from advice)</em>' : '';
        return `<li>#${i + 1} observed point ${entry.point}${deviated}</li>`;
      }
      return `<li>#${i + 1} declared label ${entry.label}, alarm ${entry.alarm}</li>`;
    })
    .join('');
  return `<ol class="history">${items}</ol>`;
}

export function renderView(view: ConsoleView): string {
  return (
    `<div class="console" data-status="${view.status}">` +
    `<header><span class="session-id">${escapeHtml(view.sessionId)}</span>` +
    `<span class="count">${view.auscultationCount} auscultations</span>` +
    `<button id="export">export session</button></header>` +
    renderBodyMap(view.points) +
    renderPanel(view.panel) +
    renderHistory(view) +
    `</div>`
  );
}
