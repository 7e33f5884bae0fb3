/* tslint:disable */
/* eslint-disable */

/**
 * Adversarial training on the 8-Gaussian ring, stepped from the page.
 */
export class MixtureLab {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * The 8 component centers, flattened.
     */
    centers(): Float64Array;
    /**
     * Modes covered by 512 generated samples within 3 sigma.
     */
    coverage(): number;
    d_loss(): number;
    g_loss(): number;
    /**
     * `n` generated points, flattened [x0, y0, x1, y1, ...]; the draw seed
     * follows the round counter so the cloud animates.
     */
    generated(n: number): Float64Array;
    /**
     * Mean interpolate gradient norm of the last round (NaN unless the
     * penalty objective is active).
     */
    grad_norm(): number;
    constructor(objective: string, minibatch: boolean, seed: number);
    /**
     * `n` real points, flattened.
     */
    real(n: number): Float64Array;
    round(): number;
    /**
     * Run `rounds` training rounds (1 critic + 2 generator updates each).
     */
    step(rounds: number): void;
}

/**
 * The text pipeline at browser scale: a ~120-sentence grammar corpus, the
 * sentence encoder/decoder, and an embedding-space GAN.
 */
export class TextLab {
    free(): void;
    [Symbol.dispose](): void;
    corpus_preview(n: number): string;
    epoch(): number;
    gan_d_loss(): number;
    gan_g_loss(): number;
    gan_round(): number;
    gan_step(rounds: number): void;
    /**
     * Encode the corpus with the current encoder and start an
     * embedding-space GAN.
     */
    init_gan(objective: string, minibatch: boolean, seed: number): void;
    loss(): number;
    constructor(seed: number);
    /**
     * Fraction of short training sentences (<= 6 tokens) reproduced exactly
     * by greedy next-sentence decoding.
     */
    reconstruction_rate(): number;
    /**
     * A few "current => decoded next |. expected next" lines.
     */
    reconstructions(n: number, seed: number): string;
    /**
     * Sample `n` vectors from the generator and greedy-decode them.
     */
    sample(n: number, seed: number): string;
    sentence_count(): number;
    /**
     * One training epoch of the sentence model; returns the mean loss.
     * Invalidates any GAN trained on the previous embeddings.
     */
    train_epoch(): number;
}

/**
 * Score hypothesis lines against reference lines (every hypothesis sees all
 * references). Returns "metric,value" CSV lines.
 */
export function score_metrics(hyp_text: string, ref_text: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_mixturelab_free: (a: number, b: number) => void;
    readonly __wbg_textlab_free: (a: number, b: number) => void;
    readonly mixturelab_centers: (a: number) => [number, number];
    readonly mixturelab_coverage: (a: number) => [number, number, number];
    readonly mixturelab_d_loss: (a: number) => number;
    readonly mixturelab_g_loss: (a: number) => number;
    readonly mixturelab_generated: (a: number, b: number) => [number, number, number, number];
    readonly mixturelab_grad_norm: (a: number) => number;
    readonly mixturelab_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly mixturelab_real: (a: number, b: number) => [number, number];
    readonly mixturelab_round: (a: number) => number;
    readonly mixturelab_step: (a: number, b: number) => [number, number];
    readonly score_metrics: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly textlab_corpus_preview: (a: number, b: number) => [number, number];
    readonly textlab_epoch: (a: number) => number;
    readonly textlab_gan_d_loss: (a: number) => number;
    readonly textlab_gan_g_loss: (a: number) => number;
    readonly textlab_gan_round: (a: number) => number;
    readonly textlab_gan_step: (a: number, b: number) => [number, number];
    readonly textlab_init_gan: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly textlab_loss: (a: number) => number;
    readonly textlab_new: (a: number) => [number, number, number];
    readonly textlab_reconstruction_rate: (a: number) => [number, number, number];
    readonly textlab_reconstructions: (a: number, b: number, c: number) => [number, number, number, number];
    readonly textlab_sample: (a: number, b: number, c: number) => [number, number, number, number];
    readonly textlab_sentence_count: (a: number) => number;
    readonly textlab_train_epoch: (a: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
