/** Shared record shapes for the files exchanged with the core pipeline. */

export interface DetectionRecord {
  det_id: number;
  cx: number;
  cy: number;
  w: number;
  h: number;
  category: number;
  score: number;
  mask_ref: string | null;
}

export interface ImageDetections {
  image_id: string;
  width: number;
  height: number;
  detections: DetectionRecord[];
}

export interface DetectionsFile {
  version: 1;
  images: ImageDetections[];
}

export interface BoxRecord {
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export interface CropSpecRecord {
  pair_id: number;
  image_id: string;
  human_det: number;
  object_det: number;
  object_category: number;
  crop: BoxRecord;
  human_box: BoxRecord;
  object_box: BoxRecord;
  human_mask_ref: string | null;
  object_mask_ref: string | null;
  background_mode: 'retain' | 'delete';
}

export interface CropSpecFile {
  version: 1;
  image_id: string;
  pairs: CropSpecRecord[];
}

export interface TemplateRow {
  hoi_id: number;
  t1: string;
  t2: string;
}

/** One category the color-key detector knows how to localize. */
export interface ColorKeyCategory {
  category: number;
  name: string;
  /** Reference RGB this category's pixels cluster around. */
  color: [number, number, number];
  /** Max per-channel distance from the reference color. */
  tolerance: number;
}

export interface DetectorConfig {
  categories: ColorKeyCategory[];
  /** Components smaller than this many pixels are discarded as speckle. */
  minArea: number;
}
