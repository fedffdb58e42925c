/** Page wiring: pick or capture a photo, submit it, render the outcome.
 *
 * One diagnosis request is in flight at a time; the submit control stays
 * disabled until the current one resolves. Retry re-submits the same file.
 */

import { ApiError, diagnose } from './api.js'
import { resolveBaseUrl } from './config.js'
import { renderError, renderResultCard, renderSpinner } from './view.js'

interface AppElements {
  fileInput: HTMLInputElement
  submitButton: HTMLButtonElement
  heatmapToggle: HTMLInputElement
  preview: HTMLImageElement
  outcome: HTMLElement
  cameraButton: HTMLButtonElement
  cameraVideo: HTMLVideoElement
  captureButton: HTMLButtonElement
}

export class DiagnosisApp {
  private selected: Blob | null = null
  private busy = false
  private stream: MediaStream | null = null

  constructor(
    private readonly els: AppElements,
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {
    els.fileInput.addEventListener('change', () => {
      const file = els.fileInput.files?.[0]
      if (file) this.selectFile(file)
    })
    els.submitButton.addEventListener('click', () => void this.submit())
    els.cameraButton.addEventListener('click', () => void this.toggleCamera())
    els.captureButton.addEventListener('click', () => void this.captureFrame())
    this.syncControls()
  }

  selectFile(file: Blob): void {
    this.selected = file
    if (typeof URL.createObjectURL === 'function') {
      this.els.preview.src = URL.createObjectURL(file)
      this.els.preview.hidden = false
    }
    this.els.outcome.replaceChildren()
    this.syncControls()
  }

  async submit(): Promise<void> {
    if (!this.selected || this.busy) return
    this.busy = true
    this.syncControls()
    this.els.outcome.replaceChildren(renderSpinner())
    try {
      const result = await diagnose(this.selected, {
        baseUrl: this.baseUrl,
        heatmap: this.els.heatmapToggle.checked,
        fetchImpl: this.fetchImpl,
      })
      this.els.outcome.replaceChildren(renderResultCard(result, this.baseUrl))
    } catch (error) {
      const retryable = error instanceof ApiError && error.retryable
      const message = error instanceof Error ? error.message : String(error)
      this.els.outcome.replaceChildren(
        renderError(message, retryable ? () => void this.submit() : undefined),
      )
    } finally {
      this.busy = false
      this.syncControls()
    }
  }

  private syncControls(): void {
    this.els.submitButton.disabled = this.busy || this.selected === null
    this.els.fileInput.disabled = this.busy
  }

  /** Desktop extra: live capture from the terminal camera. */
  private async toggleCamera(): Promise<void> {
    if (this.stream) {
      this.stopCamera()
      return
    }
    if (!navigator.mediaDevices?.getUserMedia) {
      this.els.outcome.replaceChildren(renderError('Camera capture is not available in this browser.'))
      return
    }
    try {
      this.stream = await navigator.mediaDevices.getUserMedia({ video: true })
    } catch {
      this.els.outcome.replaceChildren(renderError('Camera permission was denied.'))
      return
    }
    this.els.cameraVideo.srcObject = this.stream
    this.els.cameraVideo.hidden = false
    this.els.captureButton.hidden = false
    this.els.cameraButton.textContent = 'Stop camera'
    void this.els.cameraVideo.play()
  }

  private stopCamera(): void {
    this.stream?.getTracks().forEach((track) => track.stop())
    this.stream = null
    this.els.cameraVideo.hidden = true
    this.els.captureButton.hidden = true
    this.els.cameraButton.textContent = 'Use camera'
  }

  private async captureFrame(): Promise<void> {
    const video = this.els.cameraVideo
    if (!this.stream || !video.videoWidth) return
    const canvas = document.createElement('canvas')
    canvas.width = video.videoWidth
    canvas.height = video.videoHeight
    canvas.getContext('2d')?.drawImage(video, 0, 0)
    const blob = await new Promise<Blob | null>((resolve) => canvas.toBlob(resolve, 'image/png'))
    if (blob) {
      this.stopCamera()
      this.selectFile(blob)
    }
  }
}

export function mountApp(doc: Document = document): DiagnosisApp {
  const byId = <T extends HTMLElement>(id: string): T => {
    const node = doc.getElementById(id)
    if (!node) throw new Error(`missing element #${id}`)
    return node as T
  }
  return new DiagnosisApp(
    {
      fileInput: byId<HTMLInputElement>('file-input'),
      submitButton: byId<HTMLButtonElement>('submit-button'),
      heatmapToggle: byId<HTMLInputElement>('heatmap-toggle'),
      preview: byId<HTMLImageElement>('preview'),
      outcome: byId<HTMLElement>('outcome'),
      cameraButton: byId<HTMLButtonElement>('camera-button'),
      cameraVideo: byId<HTMLVideoElement>('camera-video'),
      captureButton: byId<HTMLButtonElement>('capture-button'),
    },
    resolveBaseUrl(window),
  )
}

// Browser entry point; tests import the classes instead.
if (typeof document !== 'undefined' && document.getElementById('file-input')) {
  mountApp()
}
