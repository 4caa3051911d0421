/** Wire types mirroring the session engine's HTTP API. */

export interface Segment {
  tag: string; // narration | dialogue | choices | scene_update | artifact_ref | ...
  payload: string;
  speaker: string;
}

export interface TurnPayload {
  session_id: string;
  status: string;
  segments: Segment[];
  choices: string[];
  exchange_count: number;
}

export interface OpeningPayload extends TurnPayload {}

export interface CreateSessionResponse {
  session_id: string;
  status: string;
  failure: { stage: string; diagnostic: string } | null;
  title?: string;
  opening?: OpeningPayload;
}

export interface ScenePanel {
  location: string;
  act_index: number;
  current_goal: string;
  open_tensions: string[];
}

export interface CastEntry {
  name: string;
  role: string;
  traits: string;
  relationship: string;
  on_screen: boolean;
}

export interface JourneyPanel {
  acts: { index: number; goal: string; current: boolean }[];
  visited_locations: string[];
}

export interface EmotionPanel {
  arc: { timestamp: number; emotion: string; intensity: number; trigger: string }[];
  assessment: string;
}

export interface StatePanels {
  status: string;
  header: { title: string; atmosphere: string };
  scene: ScenePanel;
  cast: CastEntry[];
  journey: JourneyPanel;
  emotion: EmotionPanel;
  choices: string[];
  exchange_count: number;
}

export interface SeedForm {
  free_text: string;
  profiling_answers: [string, string][];
  keywords: string[];
}

export interface StreamEvent {
  event: string;
  index: number;
  segment?: Segment;
  turn?: number;
}

/** One rating row in the feedback payload: alias only, never an identity. */
export interface RatingEntry {
  alias: string;
  scores: Record<string, number>;
}

export interface FeedbackPayload {
  group_id: string;
  rater_id: string;
  ratings: RatingEntry[];
}
