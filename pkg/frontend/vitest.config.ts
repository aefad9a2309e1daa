import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // the live test spawns the Python service and waits on real steps
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
