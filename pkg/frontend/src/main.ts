import { ApiClient } from "./api";
import { renderBanner, renderComplete, renderErrors, renderTask } from "./render";
import { AnnotationSession } from "./session";
import { browserStore } from "./storage";
import type { KnowledgeVerdict, PairwiseVerdict, SkillVerdict, TaskKind, Verdict } from "./types";

interface UiConfig {
  baseUrl: string;
  token: string;
}

function readVerdict(root: HTMLElement, kind: TaskKind): Verdict {
  if (kind === "pairwise") {
    const picked = root.querySelector<HTMLInputElement>("input[name=choice]:checked");
    return { choice: (picked?.value ?? "") as PairwiseVerdict["choice"] };
  }
  if (kind === "skill") {
    const evidence = Array.from(
      root.querySelectorAll<HTMLInputElement>("input[name=evidence]:checked"),
    ).map((input) => Number(input.value));
    const skill = root.querySelector<HTMLInputElement>("input[name=skill]:checked")?.value ?? "";
    return { evidence_sentence_indices: evidence, skill } as SkillVerdict;
  }
  const yes = (name: string) =>
    root.querySelector<HTMLInputElement>(`input[name=${name}]:checked`)?.value;
  return {
    makes_sense: yes("makes_sense") === "yes",
    relevant: yes("relevant") === "yes",
  } as KnowledgeVerdict;
}

function knowledgeAnswered(root: HTMLElement): boolean {
  return ["makes_sense", "relevant"].every(
    (name) => root.querySelector(`input[name=${name}]:checked`) !== null,
  );
}

async function start(): Promise<void> {
  const app = document.getElementById("app")!;
  const banner = document.getElementById("banner")!;
  const tabs = document.getElementById("tabs")!;
  const config = (await (await fetch("./config.json")).json()) as UiConfig;

  const params = new URLSearchParams(window.location.search);
  const annotator = params.get("annotator") || window.prompt("Annotator id:") || "anonymous";
  let kindFilter = (params.get("kind") as TaskKind | null) ?? undefined;

  const api = new ApiClient(config.baseUrl, config.token);
  const session = new AnnotationSession(api, browserStore(), annotator);

  const refreshBanner = () => {
    banner.innerHTML = renderBanner(session.unsyncedCount());
  };

  const refreshTabs = () => {
    for (const button of tabs.querySelectorAll<HTMLButtonElement>("button[data-kind]")) {
      button.classList.toggle("active", (button.dataset.kind || undefined) === kindFilter);
    }
  };

  const showNext = async () => {
    let task;
    try {
      task = await session.advance(kindFilter);
    } catch {
      banner.innerHTML =
        '<div class="banner offline">Cannot reach the annotation service; retrying on submit.</div>';
      return;
    }
    refreshBanner();
    refreshTabs();
    app.innerHTML = task ? renderTask(task) : renderComplete();
  };

  tabs.addEventListener("click", async (event) => {
    const button = (event.target as HTMLElement).closest<HTMLButtonElement>("button[data-kind]");
    if (!button) return;
    kindFilter = (button.dataset.kind || undefined) as TaskKind | undefined;
    await showNext();
  });

  app.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    if (target.id !== "submit" || !session.current) return;
    const section = app.querySelector<HTMLElement>("section.task")!;
    const kind = session.current.kind;
    if (kind === "knowledge" && !knowledgeAnswered(section)) {
      section.querySelector(".errors")?.remove();
      section.insertAdjacentHTML("beforeend", renderErrors(["answer both yes/no questions"]));
      return;
    }
    const verdict = readVerdict(section, kind);
    const outcome = await session.submit(verdict);
    section.querySelector(".errors")?.remove();
    if (outcome.state === "invalid") {
      section.insertAdjacentHTML("beforeend", renderErrors(outcome.errors));
      return;
    }
    if (outcome.state === "rejected") {
      section.insertAdjacentHTML("beforeend", renderErrors(outcome.fieldErrors));
      return;
    }
    // synced or queued-offline both advance; queued items drain later
    refreshBanner();
    await showNext();
  });

  await showNext();
}

start();
