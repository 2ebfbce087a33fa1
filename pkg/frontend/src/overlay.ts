import type { RegionGesture } from "./gestures.js";

// All pixels shown here come from the service: the mask layer is the PNG
// the server rendered and the contour polylines are its marching-squares
// output. The canvas only scales, tints and decorates — it never
// re-thresholds the field.

const MASK_TINT: [number, number, number, number] = [255, 120, 40, 110];
const CONTOUR_STYLE = "#00d4ff";
const GESTURE_STYLE = "rgba(80, 220, 130, 0.9)";
const POINT_STYLE = "#ffd700";
const BAD_PIXEL_STYLE = "#ff3860";

export class CanvasView {
  private ctx: CanvasRenderingContext2D;
  private image: ImageBitmap | null = null;
  private maskTint: HTMLCanvasElement | null = null;
  private contours: number[][][] = [];
  private gesture: RegionGesture | null = null;
  private seedPoint: [number, number] | null = null;
  private badPixel: [number, number] | null = null;
  width = 0;
  height = 0;

  constructor(private canvas: HTMLCanvasElement, private scale = 10) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
  }

  async setImage(pngBytes: Uint8Array): Promise<void> {
    const copy = new Uint8Array(pngBytes);
    this.image = await createImageBitmap(new Blob([copy.buffer], { type: "image/png" }));
    this.width = this.image.width;
    this.height = this.image.height;
    this.scale = Math.max(2, Math.floor(560 / Math.max(this.width, this.height)));
    this.canvas.width = this.width * this.scale;
    this.canvas.height = this.height * this.scale;
    this.maskTint = null;
    this.contours = [];
    this.clearDecorations();
    this.draw();
  }

  async setMaskPng(pngBytes: Uint8Array): Promise<void> {
    const copy = new Uint8Array(pngBytes);
    const bitmap = await createImageBitmap(new Blob([copy.buffer], { type: "image/png" }));
    const tint = document.createElement("canvas");
    tint.width = bitmap.width;
    tint.height = bitmap.height;
    const tctx = tint.getContext("2d")!;
    tctx.drawImage(bitmap, 0, 0);
    const data = tctx.getImageData(0, 0, tint.width, tint.height);
    const px = data.data;
    for (let i = 0; i < px.length; i += 4) {
      if (px[i] > 127) {
        px[i] = MASK_TINT[0];
        px[i + 1] = MASK_TINT[1];
        px[i + 2] = MASK_TINT[2];
        px[i + 3] = MASK_TINT[3];
      } else {
        px[i + 3] = 0;
      }
    }
    tctx.putImageData(data, 0, 0);
    this.maskTint = tint;
    this.draw();
  }

  setContours(contours: number[][][]): void {
    this.contours = contours;
    this.draw();
  }

  setGesture(gesture: RegionGesture | null): void {
    this.gesture = gesture;
    this.draw();
  }

  setSeedPoint(point: [number, number] | null): void {
    this.seedPoint = point;
    this.draw();
  }

  setBadPixel(pixel: [number, number] | null): void {
    this.badPixel = pixel;
    this.draw();
  }

  clearDecorations(): void {
    this.gesture = null;
    this.seedPoint = null;
    this.badPixel = null;
  }

  // mouse event -> image pixel coordinates (fractional)
  toImageCoords(event: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    const x = ((event.clientX - rect.left) / rect.width) * this.width;
    const y = ((event.clientY - rect.top) / rect.height) * this.height;
    return [x - 0.5, y - 0.5];
  }

  draw(): void {
    const { ctx, scale } = this;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.image) return;
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(this.image, 0, 0, this.canvas.width, this.canvas.height);
    if (this.maskTint) {
      ctx.drawImage(this.maskTint, 0, 0, this.canvas.width, this.canvas.height);
    }

    // contour polylines live in pixel-center coordinates
    ctx.strokeStyle = CONTOUR_STYLE;
    ctx.lineWidth = 2;
    for (const line of this.contours) {
      if (line.length < 2) continue;
      ctx.beginPath();
      ctx.moveTo((line[0][0] + 0.5) * scale, (line[0][1] + 0.5) * scale);
      for (let i = 1; i < line.length; i++) {
        ctx.lineTo((line[i][0] + 0.5) * scale, (line[i][1] + 0.5) * scale);
      }
      ctx.stroke();
    }

    if (this.gesture) this.drawGesture(this.gesture);
    if (this.seedPoint) this.drawMarker(this.seedPoint, POINT_STYLE);
    if (this.badPixel) this.drawMarker(this.badPixel, BAD_PIXEL_STYLE, true);
  }

  private drawGesture(gesture: RegionGesture): void {
    const { ctx, scale } = this;
    ctx.strokeStyle = GESTURE_STYLE;
    ctx.fillStyle = GESTURE_STYLE;
    ctx.lineWidth = 2;
    switch (gesture.tool) {
      case "rect": {
        const x = Math.min(gesture.x0, gesture.x1);
        const y = Math.min(gesture.y0, gesture.y1);
        const w = Math.abs(gesture.x1 - gesture.x0) + 1;
        const h = Math.abs(gesture.y1 - gesture.y0) + 1;
        ctx.strokeRect(x * scale, y * scale, w * scale, h * scale);
        break;
      }
      case "polygon": {
        if (gesture.vertices.length === 0) break;
        ctx.beginPath();
        ctx.moveTo(
          (gesture.vertices[0][0] + 0.5) * scale,
          (gesture.vertices[0][1] + 0.5) * scale
        );
        for (const [vx, vy] of gesture.vertices.slice(1)) {
          ctx.lineTo((vx + 0.5) * scale, (vy + 0.5) * scale);
        }
        ctx.closePath();
        ctx.stroke();
        for (const [vx, vy] of gesture.vertices) {
          ctx.fillRect((vx + 0.5) * scale - 2, (vy + 0.5) * scale - 2, 4, 4);
        }
        break;
      }
      case "scribble": {
        ctx.lineWidth = Math.max(2, gesture.radius * 2 * scale);
        ctx.lineCap = "round";
        ctx.lineJoin = "round";
        ctx.globalAlpha = 0.45;
        ctx.beginPath();
        const [sx, sy] = gesture.path[0];
        ctx.moveTo((sx + 0.5) * scale, (sy + 0.5) * scale);
        for (const [px, py] of gesture.path.slice(1)) {
          ctx.lineTo((px + 0.5) * scale, (py + 0.5) * scale);
        }
        if (gesture.path.length === 1) {
          ctx.lineTo((sx + 0.5) * scale + 0.01, (sy + 0.5) * scale);
        }
        ctx.stroke();
        ctx.globalAlpha = 1;
        ctx.lineWidth = 2;
        break;
      }
    }
  }

  private drawMarker(pixel: [number, number], style: string, cross = false): void {
    const { ctx, scale } = this;
    const cx = (pixel[0] + 0.5) * scale;
    const cy = (pixel[1] + 0.5) * scale;
    ctx.strokeStyle = style;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(cx, cy, Math.max(4, scale * 0.6), 0, Math.PI * 2);
    ctx.stroke();
    if (cross) {
      const r = Math.max(6, scale * 0.9);
      ctx.beginPath();
      ctx.moveTo(cx - r, cy);
      ctx.lineTo(cx + r, cy);
      ctx.moveTo(cx, cy - r);
      ctx.lineTo(cx, cy + r);
      ctx.stroke();
    }
  }
}
