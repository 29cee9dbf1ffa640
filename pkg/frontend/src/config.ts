/** Runtime configuration: a global override, else ./config.json, else defaults. */

export interface UiConfig {
  apiBase: string;
  publisher: string;   // user whose CCTK namespace seeds the default query
  prefixes: string[];  // tag prefixes to read thorn columns from, in order
}

const DEFAULTS: UiConfig = {
  apiBase: "http://127.0.0.1:8080",
  publisher: "gridaphobe",
  prefixes: ["gridaphobe/CCTK"],
};

declare global {
  interface Window {
    FLUIDTAG_CONFIG?: Partial<UiConfig>;
  }
}

export async function loadConfig(): Promise<UiConfig> {
  if (typeof window !== "undefined" && window.FLUIDTAG_CONFIG) {
    return { ...DEFAULTS, ...window.FLUIDTAG_CONFIG };
  }
  try {
    const response = await fetch("./config.json");
    if (response.ok) {
      return { ...DEFAULTS, ...(await response.json()) };
    }
  } catch {
    /* static bundle without a config endpoint */
  }
  return DEFAULTS;
}
