/** Decoder for the binary PGM (P5) frames streamed by the server. */

export interface PgmImage {
  rows: number;
  cols: number;
  maxval: number;
  /** row-major, rows*cols bytes */
  pixels: Uint8Array;
}

export function base64ToBytes(b64: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  return new Uint8Array(Buffer.from(b64, "base64"));
}

export function decodePgm(bytes: Uint8Array): PgmImage {
  // header: "P5" <ws> width <ws> height <ws> maxval <single ws> raster
  let pos = 0;
  const isSpace = (c: number) => c === 32 || c === 9 || c === 10 || c === 13;

  const token = (): string => {
    while (pos < bytes.length) {
      if (bytes[pos] === 35 /* '#' */) {
        while (pos < bytes.length && bytes[pos] !== 10) pos++;
      } else if (isSpace(bytes[pos])) {
        pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos])) pos++;
    return String.fromCharCode(...bytes.subarray(start, pos));
  };

  if (token() !== "P5") throw new Error("not a binary PGM (P5) image");
  const cols = parseInt(token(), 10);
  const rows = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(cols > 0) || !(rows > 0) || !(maxval > 0) || maxval > 255)
    throw new Error("invalid PGM header");
  pos++; // the single whitespace byte before the raster
  const pixels = bytes.subarray(pos, pos + rows * cols);
  if (pixels.length !== rows * cols) throw new Error("truncated PGM raster");
  return { rows, cols, maxval, pixels: new Uint8Array(pixels) };
}
