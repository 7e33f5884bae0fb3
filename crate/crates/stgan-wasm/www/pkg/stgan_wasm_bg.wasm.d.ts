/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_mixturelab_free: (a: number, b: number) => void;
export const __wbg_textlab_free: (a: number, b: number) => void;
export const mixturelab_centers: (a: number) => [number, number];
export const mixturelab_coverage: (a: number) => [number, number, number];
export const mixturelab_d_loss: (a: number) => number;
export const mixturelab_g_loss: (a: number) => number;
export const mixturelab_generated: (a: number, b: number) => [number, number, number, number];
export const mixturelab_grad_norm: (a: number) => number;
export const mixturelab_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const mixturelab_real: (a: number, b: number) => [number, number];
export const mixturelab_round: (a: number) => number;
export const mixturelab_step: (a: number, b: number) => [number, number];
export const score_metrics: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const textlab_corpus_preview: (a: number, b: number) => [number, number];
export const textlab_epoch: (a: number) => number;
export const textlab_gan_d_loss: (a: number) => number;
export const textlab_gan_g_loss: (a: number) => number;
export const textlab_gan_round: (a: number) => number;
export const textlab_gan_step: (a: number, b: number) => [number, number];
export const textlab_init_gan: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const textlab_loss: (a: number) => number;
export const textlab_new: (a: number) => [number, number, number];
export const textlab_reconstruction_rate: (a: number) => [number, number, number];
export const textlab_reconstructions: (a: number, b: number, c: number) => [number, number, number, number];
export const textlab_sample: (a: number, b: number, c: number) => [number, number, number, number];
export const textlab_sentence_count: (a: number) => number;
export const textlab_train_epoch: (a: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
