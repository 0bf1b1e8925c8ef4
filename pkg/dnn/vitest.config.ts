import { defineConfig } from "vitest/config";

// training-heavy tests: the acceptance run trains four recurrent networks
export default defineConfig({
  test: {
    testTimeout: 600_000,
    hookTimeout: 120_000,
  },
});
