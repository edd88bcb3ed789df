// Handcrafted session documents mirroring the service's GET shape.

import { SessionDocument } from '../src/api';

export function zeroState(): number[][] {
  return Array.from({ length: 12 }, () => Array(9).fill(0));
}

export function freshDoc(): SessionDocument {
  const q = Array(15).fill(0.1);
  q[3] = 0.9; // advise point 4
  return {
    session_id: 'abc123',
    model_id: 'demo',
    status: 'active',
    state: zeroState(),
    auscultation_count: 0,
    history: [],
    advice: { type: 'auscultate', point: 4, q_values: q },
  };
}

export function visitedDoc(): SessionDocument {
  const doc = freshDoc();
  doc.state[3] = [0.2, 0.3, 0.1, 0, 0.5, 0.6, 0, 0.4, 2];
  doc.auscultation_count = 2;
  doc.history = [
    { type: 'observation', point: 4, features: [0.1, 0, 0, 0, 0, 0, 0, 0], advised: 4, deviated: false },
    { type: 'observation', point: 4, features: [0.2, 0.3, 0.1, 0, 0.5, 0.6, 0, 0.4], advised: 7, deviated: true },
  ];
  doc.advice = { type: 'auscultate', point: 7, q_values: Array(15).fill(0.2) };
  return doc;
}

export function declaredDoc(): SessionDocument {
  const doc = visitedDoc();
  const q = Array(15).fill(-0.5);
  q[14] = 1.4;
  doc.status = 'declared';
  doc.advice = { type: 'declare', label: 2, alarm: true, q_values: q };
  doc.history = [
    ...doc.history,
    { type: 'declaration', label: 2, alarm: true, q_values: q },
  ];
  return doc;
}

export function limitDoc(): SessionDocument {
  const doc = freshDoc();
  doc.state = doc.state.map((row) => [...row.slice(0, 8), 1]);
  doc.auscultation_count = 12;
  doc.status = 'limit_reached';
  doc.advice = null;
  return doc;
}
