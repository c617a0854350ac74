/** Exhibit info texts, keyed by the snippet id carried in each snapshot.
 *
 * Embedded verbatim; the suite checks them against the shared fixture file
 * byte for byte, so edit there first if the wording ever changes.
 */

export const SNIPPETS: Record<string, string> = {
  a: "In May 1997, the barrel-shaped robot guided museum visitors to selected exhibits and presented them. Now it has been virtually recreated.",
  b: "You are now in a room with RHINO. Move the right controller in any direction and press the A button to give RHINO a destination",
  c: "To determine its position in space, the robot first scanned its surroundings with laser and sonar sensors. RHINO compared the result of the scan with a predefined map and estimated its probable position. After each movement, RHINO calculated new possible positions.",
  d: "RHINO used a movement planning algorithm called A* to avoid obstacles. It calculated several paths based on its current position, speed and surroundings. It then chose the shortest path to reach a specific destination - without colliding with obstacles!",
  e: "To avoid people walking around the museum, RHINO constantly updated a map during its journey. An artificial neural network was used for this and trained in advance to predict whether there is an obstacle in its path.",
  f: "RHINO was also equipped with infrared and touch sensors, as well as two cameras. The camera was also used at the time to allow people to view the exhibition and control RHINO remotely from home.",
};

export function snippetText(id: string): string {
  return SNIPPETS[id] ?? `(unknown snippet: ${id})`;
}
