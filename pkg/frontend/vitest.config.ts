import { defineConfig } from "vitest/config";

export default defineConfig({
    test: {
        environment: "node",
        include: ["tests/**/*.test.ts"],
        hookTimeout: 180_000,
        testTimeout: 120_000,
        // the integration suite owns a single service process
        fileParallelism: false,
    },
});
