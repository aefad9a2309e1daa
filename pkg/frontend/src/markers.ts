// Marker styling for the belief map. Civilians are green dots whose hue
// darkens as health worsens, a dead civilian is black, platoon agents keep
// their service colours (fire red, ambulance white, police yellow), and a
// blocked road carries a black 'X'.

export type Health = "healthy" | "injured" | "critical" | "dead";

export function healthBucket(hp: number): Health {
  if (hp <= 0) return "dead";
  if (hp <= 30) return "critical";
  if (hp <= 70) return "injured";
  return "healthy";
}

export const CIVILIAN_FILL: Record<Health, string> = {
  healthy: "#3aa655",
  injured: "#256b37",
  critical: "#123a1d",
  dead: "#000000",
};

export function civilianFill(hp: number): string {
  return CIVILIAN_FILL[healthBucket(hp)];
}

export const AGENT_STYLE: Record<string, { fill: string; stroke: string }> = {
  fire_brigade: { fill: "#d0342c", stroke: "#7c1f1a" },
  ambulance: { fill: "#ffffff", stroke: "#5b5b5b" },
  police: { fill: "#f0c527", stroke: "#8a7113" },
};

export const BUILDING_FILL: Record<string, string> = {
  unknown: "#e8e4da",
  none: "#c9c4b8",
  heating: "#f2a33c",
  burning: "#e25822",
  inferno: "#9c1f0e",
  destroyed: "#55504a",
};

export const BLOCKAGE_MARK = "X";
export const BLOCKAGE_COLOR = "#000000";

export const ROAD_STROKE = "#9a958c";
export const ROAD_REQUESTED_STROKE = "#4a7db5";

/** Relative luminance, for ordering swatches from dark to light. */
export function luminance(hex: string): number {
  const n = parseInt(hex.slice(1), 16);
  const r = (n >> 16) & 0xff;
  const g = (n >> 8) & 0xff;
  const b = n & 0xff;
  return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

export interface LegendEntry {
  label: string;
  shape: "dot" | "square" | "mark";
  fill: string;
  stroke?: string;
  mark?: string;
}

/** The fixed legend drawn beside the map, one entry per marker kind. */
export function legendEntries(): LegendEntry[] {
  return [
    { label: "civilian (healthy)", shape: "dot", fill: CIVILIAN_FILL.healthy },
    { label: "civilian (injured)", shape: "dot", fill: CIVILIAN_FILL.injured },
    { label: "civilian (critical)", shape: "dot", fill: CIVILIAN_FILL.critical },
    { label: "civilian (dead)", shape: "dot", fill: CIVILIAN_FILL.dead },
    {
      label: "fire brigade",
      shape: "dot",
      fill: AGENT_STYLE.fire_brigade!.fill,
      stroke: AGENT_STYLE.fire_brigade!.stroke,
    },
    {
      label: "ambulance",
      shape: "dot",
      fill: AGENT_STYLE.ambulance!.fill,
      stroke: AGENT_STYLE.ambulance!.stroke,
    },
    {
      label: "police",
      shape: "dot",
      fill: AGENT_STYLE.police!.fill,
      stroke: AGENT_STYLE.police!.stroke,
    },
    { label: "building (unscouted)", shape: "square", fill: BUILDING_FILL.unknown! },
    { label: "building (heating)", shape: "square", fill: BUILDING_FILL.heating! },
    { label: "building (burning)", shape: "square", fill: BUILDING_FILL.burning! },
    { label: "building (inferno)", shape: "square", fill: BUILDING_FILL.inferno! },
    { label: "road blockage", shape: "mark", fill: BLOCKAGE_COLOR, mark: BLOCKAGE_MARK },
  ];
}
