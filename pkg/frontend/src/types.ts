export type TaskKind = "pairwise" | "skill" | "knowledge";

export interface SentenceChip {
  index: number;
  text: string;
}

export interface PairwisePayload {
  question_a: string;
  question_b: string;
  answer: string;
  aspect: "grammaticality" | "answerability" | "relevance" | string;
}

export interface SkillPayload {
  question: string;
  answer: string;
  sentences: SentenceChip[];
}

export interface KnowledgePayload {
  question: string;
  answer: string;
  knowledge_text: string;
}

export interface TaskView {
  task_id: string;
  kind: TaskKind;
  context: string;
  payload: PairwisePayload | SkillPayload | KnowledgePayload;
}

export type PairwiseVerdict = { choice: "A" | "B" | "TIE" };
export type SkillVerdict = { evidence_sentence_indices: number[]; skill: string };
export type KnowledgeVerdict = { makes_sense: boolean; relevant: boolean };
export type Verdict = PairwiseVerdict | SkillVerdict | KnowledgeVerdict;

export interface JudgmentSubmission {
  task_id: string;
  annotator_id: string;
  verdict: Verdict;
}

export interface FieldError {
  field: string;
  error: string;
}

export interface Progress {
  n_tasks: number;
  n_judgments: number;
  per_annotator: Record<string, number>;
  per_kind: Record<string, number>;
}

export const SKILL_NAMES = ["remember", "understand", "analyze", "create", "evaluate"] as const;
