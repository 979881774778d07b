import { SessionApi } from "./api.js";
import { SessionController } from "./state.js";
import { render } from "./view.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const params = new URLSearchParams(window.location.search);
const api = new SessionApi("", params.get("token") ?? "");
const controller = new SessionController(api);

const handlers = {
  onStart: () => {
    void controller.start({
      split: params.get("split") ?? undefined,
      record_id: params.get("record") ?? undefined,
    });
  },
  onCandidate: (index: number) => void controller.submitAction(index),
  onAnswer: (text: string) => void controller.submitAnswer(text),
  onRetryScreenshot: () => void controller.refresh(),
};

controller.onChange((state) => render(root, state, handlers));
render(root, controller.getState(), handlers);
