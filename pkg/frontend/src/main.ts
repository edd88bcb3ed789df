// Browser wiring. The session id lives in the URL hash, so a reload (or a
// pasted link) reconstructs the view with a single GET; nothing else is
// kept on the client.

import { ApiError, ExamApi, SessionDocument } from './api';
import { buildView, exportDocument, N_FEATURES } from './model';
import { renderView } from './ui';

const api = new ExamApi('');
const root = document.getElementById('root') as HTMLElement;
const banner = document.getElementById('banner') as HTMLElement;

let selectedPoint: number | null = null;
let lastDocument: SessionDocument | null = null;

function sessionIdFromHash(): string | null {
  const match = window.location.hash.match(/^#s=(\w+)$/);
  return match ? match[1] : null;
}

function showBanner(text: string, retry?: () => void) {
  banner.innerHTML = '';
  banner.textContent = text;
  if (retry) {
    const button = document.createElement('button');
    button.textContent = 'retry';
    button.onclick = retry;
    banner.appendChild(button);
  }
  banner.hidden = false;
}

function clearBanner() {
  banner.hidden = true;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

async function refresh() {
  const sessionId = sessionIdFromHash();
  if (!sessionId) {
    renderStart();
    return;
  }
  try {
    lastDocument = await api.getSession(sessionId);
  } catch (err) {
    showBanner(`could not load session: ${describe(err)}`, refresh);
    return;
  }
  clearBanner();
  const view = buildView(lastDocument);
  root.innerHTML = renderView(view);
  if (view.status === 'active') {
    root.insertAdjacentHTML('beforeend', entryFormHtml(view.panel.kind === 'auscultate' ? (view.panel as { point: number }).point : 1));
    wireEntryForm(sessionId);
  }
  wireCommon();
}

function renderStart() {
  root.innerHTML =
    '<div class="start"><h1>guided auscultation</h1>' +
    '<button id="start">start examination</button></div>';
  const button = document.getElementById('start') as HTMLButtonElement;
  button.onclick = async () => {
    try {
      const created = await api.createSession();
      clearBanner();
      window.location.hash = `#s=${created.session_id}`;
      await refresh();
    } catch (err) {
      showBanner(`could not start: ${describe(err)}`, () => button.click());
    }
  };
}

function entryFormHtml(advisedPoint: number): string {
  const sliders = [...Array(N_FEATURES).keys()]
    .map(
      (i) =>
        `<label>f${i}<input type="range" min="0" max="1" step="0.01" value="0" data-feature="${i}"></label>`,
    )
    .join('');
  return (
    `<form class="entry" data-selected="${advisedPoint}">` +
    `<p>recording point <output id="selected-point">${advisedPoint}</output></p>` +
    `<div class="sliders">${sliders}</div>` +
    `<label class="upload">raster file <input type="file" id="raster-file" accept=".json"></label>` +
    `<button type="submit">submit observation</button></form>`
  );
}

function wireEntryForm(sessionId: string) {
  const form = root.querySelector('form.entry') as HTMLFormElement;
  const output = document.getElementById('selected-point') as HTMLOutputElement;
  selectedPoint = Number(form.dataset.selected);

  for (const cell of root.querySelectorAll<HTMLButtonElement>('.point')) {
    cell.onclick = (event) => {
      event.preventDefault();
      selectedPoint = Number(cell.dataset.point);
      output.value = String(selectedPoint);
    };
  }

  form.onsubmit = async (event) => {
    event.preventDefault();
    const point = selectedPoint ?? 1;
    const fileInput = document.getElementById('raster-file') as HTMLInputElement;
    try {
      let warning: string | null;
      if (fileInput.files && fileInput.files.length > 0) {
        const raster = JSON.parse(await fileInput.files[0].text());
        warning = (await api.submitRaster(sessionId, point, raster)).warning;
      } else {
        const features = [...form.querySelectorAll<HTMLInputElement>('input[data-feature]')].map(
          (input) => Number(input.value),
        );
        warning = (await api.submitObservation(sessionId, point, features)).warning;
      }
      if (warning) {
        showBanner(warning);
      } else {
        clearBanner();
      }
      await refresh();
    } catch (err) {
      showBanner(`submission failed: ${describe(err)}`, () => form.requestSubmit());
    }
  };
}

function wireCommon() {
  const exportButton = document.getElementById('export');
  if (exportButton && lastDocument) {
    exportButton.onclick = () => {
      const doc = lastDocument as SessionDocument;
      const blob = new Blob([exportDocument(doc)], { type: 'application/json' });
      const link = document.createElement('a');
      link.href = URL.createObjectURL(blob);
      link.download = `session-${doc.session_id}.json`;
      link.click();
      URL.revokeObjectURL(link.href);
    };
  }
}

window.addEventListener('hashchange', refresh);
refresh();
