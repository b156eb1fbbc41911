/**
 * Browser bootstrap: mount the controller on #app, re-render on every
 * state change, and delegate events via data-action attributes. All
 * behavior lives in the controller; this file is plumbing only.
 */

import { ApiClient } from "./api.js";
import { AppController } from "./controller.js";
import { renderApp } from "./render.js";
import type { TermJson } from "./types.js";

function readInputTerm(input: HTMLInputElement | HTMLTextAreaElement | HTMLSelectElement): TermJson {
  return { type: "literal", value: input.value };
}

function start(): void {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app mount point");

  const api = new ApiClient({ baseUrl: "" });
  const controller = new AppController(api, {
    onChange: (state) => {
      root.innerHTML = renderApp(state);
    },
    confirm: (message) => window.confirm(message),
  });

  root.addEventListener("input", (event) => {
    const target = event.target as HTMLInputElement;
    if (target.dataset.search === "1" && target.dataset.property) {
      void controller.suggest(target.dataset.property, target.value);
    }
  });

  root.addEventListener("change", (event) => {
    const target = event.target as HTMLSelectElement;
    const action = target.dataset.action;
    if (action === "set-per-page") {
      void controller.setPerPage(parseInt(target.value, 10));
    }
  });

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (target === null) return;
    event.preventDefault();
    const d = target.dataset;
    switch (d.action) {
      case "dismiss-banner":
        controller.dismissBanner();
        break;
      case "open-category":
        void controller.openCatalog(d.class ?? "");
        break;
      case "open-entity":
        void controller.openEntity(d.iri ?? "");
        break;
      case "set-page":
        void controller.setPage(parseInt(d.page ?? "1", 10));
        break;
      case "new-record":
        void controller.startNewRecord(d.class ?? "");
        break;
      case "stage-addition": {
        const input = root.querySelector<HTMLInputElement>(
          `[data-property="${CSS.escape(d.property ?? "")}"]`,
        );
        if (input !== null && input.value !== "") {
          controller.stageAddition(d.property ?? "", readInputTerm(input));
          input.value = "";
        }
        break;
      }
      case "stage-removal":
        controller.stageRemoval(d.property ?? "", JSON.parse(d.term ?? "{}") as TermJson);
        break;
      case "pick-suggestion":
        controller.pickSuggestion(d.path ?? "", {
          entity: d.entity ?? "",
          display: d.display ?? "",
          score: 0,
        });
        break;
      case "save":
        void controller.save();
        break;
      case "cancel-editing":
        controller.cancelEditing();
        break;
      case "reload-reapply":
        void controller.reloadAfterConflict();
        break;
      case "delete":
        void controller.deleteEntity(d.iri ?? "");
        break;
      case "open-history":
        void controller.openHistory(d.iri ?? "");
        break;
      case "view-version":
        controller.viewVersion(parseInt(d.sequence ?? "0", 10));
        break;
      case "restore":
        void controller.restoreSnapshot(d.iri ?? "", parseInt(d.sequence ?? "0", 10));
        break;
      case "open-vault":
        void controller.openVault();
        break;
      case "restore-from-vault":
        void controller.restoreFromVault(d.entity ?? "");
        break;
      case "create-record": {
        const form = target.closest("form");
        if (form === null) break;
        const fields: { property: string; value: TermJson }[] = [];
        form.querySelectorAll<HTMLInputElement>("[data-property]").forEach((input) => {
          if (input.value !== "") {
            fields.push({ property: input.dataset.property ?? "", value: readInputTerm(input) });
          }
        });
        void controller.createRecord(fields);
        break;
      }
      case "back-to-catalog":
        void controller.loadCategories().then(() => {
          if (controller.state.category !== null) {
            void controller.openCatalog(controller.state.category);
          } else {
            controller.state.route = "catalog";
          }
        });
        break;
    }
  });

  void controller.loadCategories().then(() => {
    root.innerHTML = renderApp(controller.state);
  });
}

start();
