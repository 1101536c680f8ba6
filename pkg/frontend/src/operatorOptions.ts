/** Operator choices for a spec edge, driven entirely by the legality
 * table the server serves at /edge-ops.  The editor can therefore never
 * build an edge the server would reject. */

import type { EdgeOpsCombo, EdgeOpsTable, OpValue } from "./types.js";

export type SlotName = "bo2" | "to2" | "to1";

export const SLOTS: SlotName[] = ["bo2", "to2", "to1"];

/** A partially chosen edge label: a present key (possibly null, the
 * empty operator) is a committed choice; an absent key is still open. */
export interface EdgeOpsSelection {
  bo2?: OpValue;
  to2?: OpValue;
  to1?: OpValue;
}

export type NextOptions = Partial<Record<SlotName, OpValue[]>>;

function matches(combo: EdgeOpsCombo, selection: EdgeOpsSelection): boolean {
  const [bo2, to2, to1] = combo;
  const values: Record<SlotName, OpValue> = { bo2, to2, to1 };
  return SLOTS.every((slot) => !(slot in selection) || selection[slot] === values[slot]);
}

function sortValues(values: Set<OpValue>): OpValue[] {
  return [...values].sort((a, b) => {
    if (a === b) return 0;
    if (a === null) return -1;
    if (b === null) return 1;
    return a < b ? -1 : 1;
  });
}

/** For every still-open slot, the values that keep at least one legal
 * combination reachable.  A fully chosen legal triple has no open slots
 * and yields an empty object. */
export function legalOperatorOptions(
  selection: EdgeOpsSelection,
  table: EdgeOpsTable,
): NextOptions {
  const compatible = table.allowed.filter((combo) => matches(combo, selection));
  const options: NextOptions = {};
  for (const slot of SLOTS) {
    if (slot in selection) {
      continue;
    }
    const index = SLOTS.indexOf(slot);
    const values = new Set<OpValue>(compatible.map((combo) => combo[index]));
    options[slot] = sortValues(values);
  }
  return options;
}

/** Whether the selection, completed or not, can still become a legal
 * combination. */
export function selectionViable(selection: EdgeOpsSelection, table: EdgeOpsTable): boolean {
  return table.allowed.some((combo) => matches(combo, selection));
}

/** Whether a fully chosen triple is in the table. */
export function comboLegal(combo: EdgeOpsCombo, table: EdgeOpsTable): boolean {
  return table.allowed.some(
    ([bo2, to2, to1]) => bo2 === combo[0] && to2 === combo[1] && to1 === combo[2],
  );
}
