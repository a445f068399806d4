// Weight bands as rendered next to the selector: 1-4 Low, 5-8 Medium, 9-12 High.

export const WEIGHT_MIN = 1;
export const WEIGHT_MAX = 12;

export function weightBand(weight: number): "Low" | "Medium" | "High" | null {
  if (!Number.isInteger(weight) || weight < WEIGHT_MIN || weight > WEIGHT_MAX) return null;
  if (weight <= 4) return "Low";
  if (weight <= 8) return "Medium";
  return "High";
}

export function weightLabel(weight: number): string {
  const band = weightBand(weight);
  return band ? `${weight} - ${band}` : `${weight} - ?`;
}
