/** The three editing modes.  Any mode can be entered at any time; the
 * roadmap saves itself when its mode is left with unsaved changes. */

export type EditMode = "sketching" | "roadmap" | "ltl";

export interface ModeState {
  mode: EditMode;
  dirty: Record<EditMode, boolean>;
}

export interface TransitionEffects {
  /** Whether a roadmap save round trip was issued. */
  savedRoadmap: boolean;
  /** Non-blocking warning to surface; the mode switches regardless. */
  banner: string | null;
}

export interface TransitionDeps {
  saveRoadmap: () => Promise<void>;
}

export function initialModeState(mode: EditMode = "roadmap"): ModeState {
  return { mode, dirty: { sketching: false, roadmap: false, ltl: false } };
}

export function markDirty(state: ModeState, mode: EditMode): ModeState {
  return { ...state, dirty: { ...state.dirty, [mode]: true } };
}

/** Switch modes, auto-saving the roadmap when leaving roadmap mode with
 * changes.  A failed save surfaces a banner but never blocks the
 * switch. */
export async function transitionMode(
  state: ModeState,
  requested: EditMode,
  deps: TransitionDeps,
): Promise<{ state: ModeState; effects: TransitionEffects }> {
  const effects: TransitionEffects = { savedRoadmap: false, banner: null };
  if (requested === state.mode) {
    return { state, effects };
  }
  let dirty = state.dirty;
  if (state.mode === "roadmap" && dirty.roadmap) {
    try {
      await deps.saveRoadmap();
      effects.savedRoadmap = true;
      dirty = { ...dirty, roadmap: false };
    } catch (err) {
      effects.savedRoadmap = true;
      effects.banner = `roadmap save failed: ${err instanceof Error ? err.message : String(err)}`;
    }
  }
  return { state: { mode: requested, dirty }, effects };
}
