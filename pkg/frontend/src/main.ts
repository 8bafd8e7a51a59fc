import { Client, SceneDetail, SceneSummary } from "./api.js";
import { SceneBrowser } from "./browser.js";
import { CATEGORY_NAMES } from "./colors.js";
import { ALL_LAYERS_ON, clusterLabel, LayerToggles, OverlayView } from "./overlay.js";
import { VerdictForm } from "./verdicts.js";

const client = new Client("");

const browser = new SceneBrowser(document.getElementById("browser")!, client);
const overlay = new OverlayView(
  document.getElementById("cam-canvas") as HTMLCanvasElement,
  document.getElementById("bev-canvas") as HTMLCanvasElement,
  document.getElementById("hover-info")!,
  document.getElementById("render-status")!
);
const form = new VerdictForm(document.getElementById("verdict-form")!, client);

const sceneTitle = document.getElementById("scene-title")!;
const sceneCounts = document.getElementById("scene-counts")!;
const clusterList = document.getElementById("cluster-list")!;
const toggleRow = document.getElementById("layer-toggles")!;

let current: SceneDetail | null = null;
const toggles: LayerToggles = { ...ALL_LAYERS_ON };

for (const name of CATEGORY_NAMES) {
  const label = document.createElement("label");
  label.className = `toggle toggle-${name}`;
  const box = document.createElement("input");
  box.type = "checkbox";
  box.checked = true;
  box.onchange = () => {
    toggles[name] = box.checked;
    overlay.setToggles(toggles);
  };
  label.append(box, document.createTextNode(name));
  toggleRow.appendChild(label);
}

function renderClusters(detail: SceneDetail, selected: number): void {
  clusterList.textContent = "";
  if (detail.clusters.length === 0) {
    clusterList.textContent = "no contradiction clusters in this frame";
    return;
  }
  for (const c of detail.clusters) {
    const row = document.createElement("div");
    row.className = `cluster-row ${c.category}` + (c.clusterId === selected ? " selected" : "");
    const text = document.createElement("span");
    text.textContent = clusterLabel(c);
    const verdicts = document.createElement("span");
    verdicts.className = "badge verdicts";
    verdicts.textContent = `${c.nVerdicts}v`;
    row.append(text, verdicts);
    row.onclick = () => selectCluster(c.clusterId);
    clusterList.appendChild(row);
  }
}

function selectCluster(clusterId: number): void {
  if (!current) return;
  overlay.setSelectedCluster(clusterId);
  form.setTarget(current.frameId, clusterId);
  renderClusters(current, clusterId);
}

async function loadScene(summary: SceneSummary): Promise<void> {
  const detail = await client.scene(summary.frameId);
  let image: ImageBitmap | null = null;
  if (detail.imageUrl) {
    try {
      const res = await fetch(detail.imageUrl);
      if (res.ok) image = await createImageBitmap(await res.blob());
    } catch {
      image = null;
    }
  }
  current = detail;
  sceneTitle.textContent = `frame ${detail.frameId} · ${detail.sequence}`;
  sceneCounts.textContent =
    `${detail.nValid} of ${detail.nTotal} points assessed · ` +
    `green ${detail.green} · blue ${detail.blue} · red ${detail.red} · yellow ${detail.yellow}`;
  overlay.setScene(detail, image);
  form.setTarget(detail.frameId, null);
  renderClusters(detail, -1);
  const first = detail.clusters[0];
  if (first) selectCluster(first.clusterId);
}

browser.onSelect = (scene) => void loadScene(scene);
overlay.onPick = (clusterId) => selectCluster(clusterId);
form.onSaved = (record) => {
  if (current && record.frameId === current.frameId) {
    const cluster = current.clusters.find((c) => c.clusterId === record.clusterId);
    if (cluster) cluster.nVerdicts += 1;
    renderClusters(current, record.clusterId);
  }
  void browser.refresh(true);
};

void browser.refresh();
