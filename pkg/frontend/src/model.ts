// Pure view model: a session document from the server maps to exactly one
// console view. Nothing here computes domain numbers; it only rearranges
// what the service reported.

import { Advice, HistoryEntry, SessionDocument } from './api';

export const N_POINTS = 12;
export const N_FEATURES = 8;

export const LABEL_NAMES = ['healthy', 'chronic', 'acute'] as const;

export interface PointView {
  point: number;
  zone: 'chest' | 'back';
  visits: number;
  features: number[] | null;
  advised: boolean;
}

export type AdvicePanel =
  | { kind: 'auscultate'; point: number; qValues: number[] }
  | { kind: 'declared'; label: number; labelName: string; alarm: boolean; qValues: number[] }
  | { kind: 'limit' };

export interface ConsoleView {
  sessionId: string;
  modelId: string;
  status: string;
  auscultationCount: number;
  points: PointView[];
  panel: AdvicePanel;
  history: HistoryEntry[];
}

function panelFrom(status: string, advice: Advice | null): AdvicePanel {
  if (status === 'limit_reached') {
    return { kind: 'limit' };
  }
  if (advice === null) {
    throw new Error(`session is ${status} but carries no advice`);
  }
  if (advice.type === 'declare') {
    const label = advice.label ?? 0;
    return {
      kind: 'declared',
      label,
      labelName: LABEL_NAMES[label] ?? `label ${label}`,
      alarm: advice.alarm ?? false,
      qValues: advice.q_values,
    };
  }
  return { kind: 'auscultate', point: advice.point ?? 1, qValues: advice.q_values };
}

export function buildView(doc: SessionDocument): ConsoleView {
  const advisedPoint =
    doc.advice !== null && doc.advice.type === 'auscultate' ? doc.advice.point : null;
  const points: PointView[] = [];
  for (let p = 1; p <= N_POINTS; p++) {
    const row = doc.state[p - 1];
    const visits = row[N_FEATURES];
    points.push({
      point: p,
      zone: p <= 6 ? 'chest' : 'back',
      visits,
      features: visits > 0 ? row.slice(0, N_FEATURES) : null,
      advised: p === advisedPoint,
    });
  }
  return {
    sessionId: doc.session_id,
    modelId: doc.model_id,
    status: doc.status,
    auscultationCount: doc.auscultation_count,
    points,
    panel: panelFrom(doc.status, doc.advice),
    history: doc.history,
  };
}

// The export affordance hands back the server document untouched.
export function exportDocument(doc: SessionDocument): string {
  return JSON.stringify(doc, null, 2);
}
