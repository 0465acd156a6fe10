import type {
  FieldError,
  KnowledgePayload,
  PairwisePayload,
  SkillPayload,
  TaskView,
} from "./types";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const ASPECT_GUIDANCE: Record<string, string> = {
  grammaticality:
    "Prefer the question that is grammatically correct. Example: pick A when B is not grammatically correct.",
  answerability:
    "Prefer the question that can actually be answered. Example: pick A when B misses important information such as named entities, relation words, or question words.",
  relevance:
    "Prefer the question that is grounded by the context. Example: pick A when B is only partially relevant and cannot be grounded by the context.",
};

const SKILL_GUIDE: Array<{ name: string; description: string; examples: string }> = [
  {
    name: "remember",
    description: "Retrieve relevant facts from the input passage.",
    examples: "what is X? when did X happen? what does X mean?",
  },
  {
    name: "understand",
    description: "Construct meanings from recalled facts.",
    examples: "how would you rephrase X? what is an example of X? what is the main idea of X? how would you compare X and Y?",
  },
  {
    name: "analyze",
    description: "Break facts into parts and determine how the parts relate to one another.",
    examples: "what caused X? what will X cause?",
  },
  {
    name: "create",
    description: "Re-organize elements into a new pattern or structure.",
    examples: "would it arrive on time? what would happen next?",
  },
  {
    name: "evaluate",
    description: "Make judgments based on established criteria.",
    examples: "what do you think of X? why is X the case?",
  },
];

const SKILL_STEPS =
  "1. Make a statement using the question and the answer. " +
  "2. Select the context sentences required to support that statement. " +
  "3. Choose the single skill needed to get from the selected sentences to the statement.";

export function renderPairwise(task: TaskView): string {
  const payload = task.payload as PairwisePayload;
  const guidance = ASPECT_GUIDANCE[payload.aspect] ?? "";
  return `
  <section class="task pairwise" data-task="${escapeHtml(task.task_id)}">
    <h2>Compare two questions: ${escapeHtml(payload.aspect)}</h2>
    <p class="guidance">${escapeHtml(guidance)}</p>
    <article class="context"><h3>Context</h3><p>${escapeHtml(task.context)}</p></article>
    <p class="answer"><strong>Answer:</strong> ${escapeHtml(payload.answer)}</p>
    <div class="question-cards">
      <label class="card"><input type="radio" name="choice" value="A">
        <span class="tag">A</span> ${escapeHtml(payload.question_a)}</label>
      <label class="card"><input type="radio" name="choice" value="B">
        <span class="tag">B</span> ${escapeHtml(payload.question_b)}</label>
      <label class="card tie"><input type="radio" name="choice" value="TIE">
        <span class="tag">Tie</span> Both are equally good</label>
    </div>
    <button id="submit">Submit</button>
  </section>`;
}

export function renderSkill(task: TaskView): string {
  const payload = task.payload as SkillPayload;
  const sentences = payload.sentences
    .map(
      (sentence) => `
      <label class="chip"><input type="checkbox" name="evidence" value="${sentence.index}">
        <span class="index">${sentence.index + 1}</span> ${escapeHtml(sentence.text)}</label>`,
    )
    .join("");
  const skills = SKILL_GUIDE.map(
    (skill) => `
      <label class="skill-option"><input type="radio" name="skill" value="${skill.name}">
        <strong>${skill.name}</strong> — ${escapeHtml(skill.description)}
        <em>${escapeHtml(skill.examples)}</em></label>`,
  ).join("");
  return `
  <section class="task skill" data-task="${escapeHtml(task.task_id)}">
    <h2>Which skill does this question require?</h2>
    <p class="guidance">${escapeHtml(SKILL_STEPS)}</p>
    <p class="question"><strong>Question:</strong> ${escapeHtml(payload.question)}</p>
    <p class="answer"><strong>Answer:</strong> ${escapeHtml(payload.answer)}</p>
    <div class="sentences"><h3>Select evidence sentences</h3>${sentences}</div>
    <div class="skills"><h3>Choose one skill</h3>${skills}</div>
    <button id="submit">Submit</button>
  </section>`;
}

export function renderKnowledge(task: TaskView): string {
  const payload = task.payload as KnowledgePayload;
  return `
  <section class="task knowledge" data-task="${escapeHtml(task.task_id)}">
    <h2>Judge the generated knowledge</h2>
    <article class="context"><h3>Context</h3><p>${escapeHtml(task.context)}</p></article>
    <p class="question"><strong>Question:</strong> ${escapeHtml(payload.question)}</p>
    <p class="answer"><strong>Answer:</strong> ${escapeHtml(payload.answer)}</p>
    <article class="knowledge-text"><h3>Knowledge</h3><p>${escapeHtml(payload.knowledge_text)}</p></article>
    <fieldset><legend>Does the knowledge make sense?</legend>
      <label><input type="radio" name="makes_sense" value="yes"> Yes</label>
      <label><input type="radio" name="makes_sense" value="no"> No</label>
    </fieldset>
    <fieldset><legend>Is the knowledge relevant to the context?</legend>
      <label><input type="radio" name="relevant" value="yes"> Yes</label>
      <label><input type="radio" name="relevant" value="no"> No</label>
    </fieldset>
    <button id="submit">Submit</button>
  </section>`;
}

export function renderTask(task: TaskView): string {
  if (task.kind === "pairwise") return renderPairwise(task);
  if (task.kind === "skill") return renderSkill(task);
  return renderKnowledge(task);
}

export function renderComplete(): string {
  return `<section class="complete"><h2>All done</h2>
    <p>There are no more tasks for you. Thank you!</p></section>`;
}

export function renderErrors(errors: string[] | FieldError[]): string {
  const items = errors
    .map((error) =>
      typeof error === "string"
        ? `<li>${escapeHtml(error)}</li>`
        : `<li><code>${escapeHtml(error.field)}</code>: ${escapeHtml(error.error)}</li>`,
    )
    .join("");
  return `<ul class="errors">${items}</ul>`;
}

export function renderBanner(unsynced: number): string {
  if (unsynced === 0) return "";
  return `<div class="banner offline">Offline: ${unsynced} judgment${
    unsynced === 1 ? "" : "s"
  } queued locally; they will sync automatically.</div>`;
}
